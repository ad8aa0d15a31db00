#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace nvreg {

struct FitResult {
  Eigen::VectorXd params;
  Eigen::VectorXd sigmas;   // 1-sigma from the scaled (J^T J)^-1 diagonal
  double chi2 = 0.0;        // sum of squared residuals at the optimum
  int iterations = 0;
  bool converged = false;
};

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-12;        // relative chi2 improvement stop
  double fd_step_scale = 1e-6;     // finite-difference step: scale * max(|p|, 1)
  std::vector<int> fixed;          // indices of parameters held at p0
  std::vector<double> lower;       // optional box bounds, empty = unbounded
  std::vector<double> upper;
};

// damped Gauss-Newton least squares of model(x, p) against (xs, ys)
FitResult least_squares_fit(
    const std::function<double(double, const Eigen::VectorXd&)>& model,
    const std::vector<double>& xs, const std::vector<double>& ys,
    const Eigen::VectorXd& p0, const FitOptions& opts = {});

// y = y0 + a * sin(2*pi*f*x + phi); params (f, a, phi, y0).
// frequency seeded by coarse grid scan unless f0 > 0
FitResult fit_sine(const std::vector<double>& xs, const std::vector<double>& ys, double f0 = 0.0);

}  // namespace nvreg
