#include <cmath>
#include <numeric>

#include "doctest.h"
#include "models.hpp"
#include "nvreg/charge_stats.hpp"
#include "nvreg/sequences.hpp"

using namespace nvreg;

namespace {

PhotonHistogram read_histogram(const std::vector<std::pair<int, int>>& shots) {
  std::vector<int> reads;
  reads.reserve(shots.size());
  for (const auto& s : shots) reads.push_back(s.second);
  return PhotonHistogram::from_samples(reads);
}

}  // namespace

TEST_CASE("photon histograms validate their bookkeeping") {
  PhotonHistogram h = PhotonHistogram::from_samples({0, 1, 1, 3});
  CHECK(h.total_shots == 4);
  REQUIRE(h.counts.size() == 4);
  CHECK(h.counts[1] == 2);
  CHECK(h.counts[2] == 0);
  CHECK_NOTHROW(h.validate());

  h.total_shots = 5;
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  h.total_shots = 4;
  h.counts[0] = -1;
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
}

TEST_CASE("single-rate data collapses to one effective component") {
  ChargeShotModel model;
  model.weights << 0.0, 0.0, 1.0;
  auto shots = sample_charge_shots(model, 40000, 11);
  PhotonHistogram h = read_histogram(shots);
  double sample_mean = 0.0;
  for (size_t n = 0; n < h.counts.size(); ++n)
    sample_mean += static_cast<double>(n) * h.counts[n];
  sample_mean /= static_cast<double>(h.total_shots);

  PoissonMixture fit = fit_poisson_mixture(h);
  CHECK(fit.converged);
  CHECK(fit.degenerate);
  double mixture_mean = fit.weights.dot(fit.lambdas);
  CHECK(mixture_mean == doctest::Approx(sample_mean).epsilon(5e-3));
  CHECK(fit.weights.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("synthetic mixture recovers sector weights and rates") {
  ChargeShotModel model;
  auto shots = sample_charge_shots(model, 100000, 7);
  PoissonMixture fit = fit_poisson_mixture(read_histogram(shots));

  CHECK(fit.converged);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.weights.sum() == doctest::Approx(1.0).epsilon(1e-9));
  for (int i = 0; i < 3; ++i) {
    CHECK(fit.weights(i) >= 0.0);
    CHECK(fit.weights(i) <= 1.0);
  }
  CHECK(std::abs(fit.weights(0) - 0.09) < 0.02);
  CHECK(std::abs(fit.weights(1) - 0.42) < 0.02);
  CHECK(std::abs(fit.weights(2) - 0.49) < 0.02);
  CHECK(fit.lambdas(0) == doctest::Approx(1.5).epsilon(0.05));
  CHECK(fit.lambdas(1) == doctest::Approx(8.0).epsilon(0.05));
  CHECK(fit.lambdas(2) == doctest::Approx(16.0).epsilon(0.05));
  for (int i = 0; i < 3; ++i) {
    CHECK(fit.weight_sigmas(i) > 0.0);
    CHECK(fit.weight_sigmas(i) < 0.02);
    CHECK(fit.lambda_sigmas(i) > 0.0);
    CHECK(fit.lambda_sigmas(i) < 0.2);
  }
}

TEST_CASE("threshold zero reproduces the unselected weights") {
  ChargeShotModel model;
  auto shots = sample_charge_shots(model, 50000, 3);
  PoissonMixture ref = fit_poisson_mixture(read_histogram(shots));

  auto pts = threshold_tradeoff(shots, {0});
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].n_thresh == 0);
  CHECK(pts[0].n_kept == 50000);
  CHECK(pts[0].relative_noise == doctest::Approx(1.0));
  CHECK(pts[0].fidelity == doctest::Approx(ref.weights(2)).epsilon(1e-4));
}

TEST_CASE("post-selection trades fidelity against noise") {
  ChargeShotModel model;
  auto shots = sample_charge_shots(model, 100000, 5);
  auto pts = threshold_tradeoff(shots, {0, 2, 4, 6, 9, 14});
  REQUIRE(pts.size() == 6);

  for (size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].fidelity >= pts[i - 1].fidelity - 1e-3);
    CHECK(pts[i].relative_noise >= pts[i - 1].relative_noise);
    CHECK(pts[i].n_kept <= pts[i - 1].n_kept);
  }
  CHECK(pts.back().fidelity > pts.front().fidelity + 0.1);

  bool strong_point = false;
  for (const auto& p : pts)
    if (p.fidelity >= 0.80 && p.relative_noise < 3.0) strong_point = true;
  CHECK(strong_point);

  CHECK_THROWS_AS(threshold_tradeoff(shots, {1000}), std::runtime_error);
}

TEST_CASE("histogram truncation leaves the fitted rates stable") {
  ChargeShotModel model;
  auto shots = sample_charge_shots(model, 100000, 9);
  PhotonHistogram full = read_histogram(shots);
  PoissonMixture a = fit_poisson_mixture(full);

  long target = static_cast<long>(0.999 * full.total_shots);
  long acc = 0;
  size_t cut = full.counts.size();
  for (size_t n = 0; n < full.counts.size(); ++n) {
    acc += full.counts[n];
    if (acc >= target) {
      cut = n + 1;
      break;
    }
  }
  PhotonHistogram trunc;
  trunc.counts.assign(full.counts.begin(),
                      full.counts.begin() + static_cast<long>(cut));
  trunc.total_shots = std::accumulate(trunc.counts.begin(),
                                      trunc.counts.end(), 0L);
  PoissonMixture b = fit_poisson_mixture(trunc);
  for (int i = 0; i < 3; ++i)
    CHECK(b.lambdas(i) == doctest::Approx(a.lambdas(i)).epsilon(0.02));
}

TEST_CASE("least squares objective agrees with maximum likelihood") {
  ChargeShotModel model;
  auto shots = sample_charge_shots(model, 100000, 7);
  PhotonHistogram h = read_histogram(shots);
  PoissonMixture ml = fit_poisson_mixture(h);
  MixtureOptions ls;
  ls.objective = MixtureObjective::least_squares;
  PoissonMixture lsq = fit_poisson_mixture(h, ls);

  CHECK(lsq.converged);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(lsq.weights(i) - ml.weights(i)) < 0.05);
    CHECK(lsq.lambdas(i) == doctest::Approx(ml.lambdas(i)).epsilon(0.05));
  }
  CHECK(lsq.log_likelihood <= ml.log_likelihood + 1e-6);
}

TEST_CASE("nearly equal rates raise the degeneracy flag") {
  ChargeShotModel model;
  model.lambda_read << 8.0, 8.2, 20.0;
  model.weights << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  auto shots = sample_charge_shots(model, 30000, 13);
  PoissonMixture fit = fit_poisson_mixture(read_histogram(shots));
  CHECK(fit.degenerate);
}

TEST_CASE("deer asymmetry vanishes for pure negative charge and grows as it degrades") {
  PairModel model = setting2_model();
  double tau1 = 2300.0;
  int n_pi = 8;
  std::vector<double> tau2;
  for (int k = 0; k < 12; ++k) tau2.push_back(60.0 + 85.0 * k);

  std::vector<double> p_levels = {1.0, 0.9, 0.75, 0.6};
  std::vector<double> asym;
  for (double p : p_levels) {
    DeerOptions opts;
    opts.mixture = ChargeMixture::independent(p, p);
    DeerResult res = deer_scan(model, tau1, tau2, n_pi, opts);
    AsymmetryResult r = deer_asymmetry(res.fit);
    REQUIRE_FALSE(r.undefined);
    asym.push_back(r.value);
  }
  CHECK(asym[0] < 0.05);
  for (size_t i = 1; i < asym.size(); ++i) CHECK(asym[i] > asym[i - 1] + 0.01);
}

TEST_CASE("asymmetry guards") {
  FitResult flat;
  flat.converged = true;
  flat.params = Eigen::Vector4d(0.1, 1e-13, 0.0, 0.3);
  flat.sigmas = Eigen::Vector4d::Zero();
  AsymmetryResult r = deer_asymmetry(flat);
  CHECK(r.undefined);

  FitResult bad;
  bad.converged = false;
  bad.params = Eigen::Vector4d(0.1, 0.5, 0.0, 0.1);
  CHECK_THROWS_AS(deer_asymmetry(bad), std::invalid_argument);
}
