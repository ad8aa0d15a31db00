#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "nvreg/algebra.hpp"
#include "nvreg/fit.hpp"

using namespace nvreg;

TEST_CASE("least squares recovers polynomial coefficients exactly") {
  std::vector<double> xs, ys;
  for (int i = 0; i < 30; ++i) {
    double x = 0.1 * i;
    xs.push_back(x);
    ys.push_back(2.5 - 1.2 * x + 0.4 * x * x);
  }
  auto model = [](double x, const Eigen::VectorXd& p) {
    return p(0) + p(1) * x + p(2) * x * x;
  };
  Eigen::VectorXd p0(3);
  p0 << 1.0, 0.0, 0.0;
  FitResult r = least_squares_fit(model, xs, ys, p0);
  REQUIRE(r.converged);
  CHECK(r.params[0] == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(r.params[1] == doctest::Approx(-1.2).epsilon(1e-9));
  CHECK(r.params[2] == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(r.chi2 < 1e-16);
}

TEST_CASE("fixed parameters stay pinned during fitting") {
  std::vector<double> xs, ys;
  for (int i = 0; i < 20; ++i) {
    xs.push_back(i);
    ys.push_back(3.0 + 2.0 * i);
  }
  auto model = [](double x, const Eigen::VectorXd& p) {
    return p(0) + p(1) * x;
  };
  FitOptions opts;
  opts.fixed = {0};
  Eigen::VectorXd p0(2);
  p0 << 1.0, 0.5;
  FitResult r = least_squares_fit(model, xs, ys, p0, opts);
  CHECK(r.params[0] == doctest::Approx(1.0));
  CHECK(r.sigmas[0] == doctest::Approx(0.0));
  CHECK(r.params[1] > 1.9);
}

TEST_CASE("sine fit recovers frequency amplitude phase and offset") {
  std::vector<double> xs, ys;
  double f = 0.35, a = 0.8, phi = 1.2, y0 = 0.3;
  for (int i = 0; i < 60; ++i) {
    double x = 0.15 * i;
    xs.push_back(x);
    ys.push_back(y0 + a * std::sin(two_pi * f * x + phi));
  }
  FitResult r = fit_sine(xs, ys);
  REQUIRE(r.converged);
  CHECK(r.params[0] == doctest::Approx(f).epsilon(1e-7));
  CHECK(r.params[1] == doctest::Approx(a).epsilon(1e-7));
  CHECK(std::abs(std::remainder(r.params[2] - phi, two_pi)) < 1e-6);
  CHECK(r.params[3] == doctest::Approx(y0).epsilon(1e-7));
}

TEST_CASE("sine fit tolerates noise and reports uncertainties") {
  std::mt19937 rng(42);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<double> xs, ys;
  double f = 0.12, a = -0.6, phi = 0.4, y0 = -0.1;
  for (int i = 0; i < 80; ++i) {
    double x = 0.3 * i;
    xs.push_back(x);
    ys.push_back(y0 + a * std::sin(two_pi * f * x + phi) + noise(rng));
  }
  FitResult r = fit_sine(xs, ys);
  REQUIRE(r.converged);
  CHECK(std::abs(r.params[0] - f) < 0.002);
  CHECK(r.sigmas[0] > 0.0);
  CHECK(r.sigmas[0] < 0.01);
}
