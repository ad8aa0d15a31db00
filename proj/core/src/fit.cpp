#include "nvreg/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nvreg/algebra.hpp"

namespace nvreg {

namespace {

Eigen::VectorXd clamp_to_bounds(Eigen::VectorXd p, const FitOptions& o) {
  for (int i = 0; i < p.size(); ++i) {
    if (!o.lower.empty()) p(i) = std::max(p(i), o.lower[i]);
    if (!o.upper.empty()) p(i) = std::min(p(i), o.upper[i]);
  }
  return p;
}

double chi2_of(const std::function<double(double, const Eigen::VectorXd&)>& model,
               const std::vector<double>& xs, const std::vector<double>& ys,
               const Eigen::VectorXd& p) {
  double s = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double r = model(xs[i], p) - ys[i];
    s += r * r;
  }
  return s;
}

}  // namespace

FitResult least_squares_fit(
    const std::function<double(double, const Eigen::VectorXd&)>& model,
    const std::vector<double>& xs, const std::vector<double>& ys,
    const Eigen::VectorXd& p0, const FitOptions& opts) {
  if (xs.size() != ys.size()) throw std::invalid_argument("least_squares_fit: x/y size mismatch");
  const int n = static_cast<int>(xs.size());
  const int k = static_cast<int>(p0.size());
  if (n < 1 || k < 1) throw std::invalid_argument("least_squares_fit: empty input");
  if (!opts.lower.empty() && static_cast<int>(opts.lower.size()) != k)
    throw std::invalid_argument("least_squares_fit: bound size mismatch");
  if (!opts.upper.empty() && static_cast<int>(opts.upper.size()) != k)
    throw std::invalid_argument("least_squares_fit: bound size mismatch");

  std::vector<bool> is_fixed(k, false);
  for (int idx : opts.fixed) {
    if (idx < 0 || idx >= k) throw std::invalid_argument("least_squares_fit: fixed index out of range");
    is_fixed[idx] = true;
  }

  FitResult out;
  Eigen::VectorXd p = clamp_to_bounds(p0, opts);
  double chi2 = chi2_of(model, xs, ys, p);
  double lambda = 1e-3;

  Eigen::VectorXd resid(n);
  Eigen::MatrixXd jac(n, k);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    out.iterations = iter + 1;
    for (int i = 0; i < n; ++i) resid(i) = model(xs[i], p) - ys[i];

    for (int j = 0; j < k; ++j) {
      if (is_fixed[j]) {
        jac.col(j).setZero();
        continue;
      }
      double h = opts.fd_step_scale * std::max(std::abs(p(j)), 1.0);
      Eigen::VectorXd pp = p;
      pp(j) += h;
      for (int i = 0; i < n; ++i) jac(i, j) = (model(xs[i], pp) - (resid(i) + ys[i])) / h;
    }

    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd jtr = jac.transpose() * resid;

    bool improved = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (int j = 0; j < k; ++j) a(j, j) += lambda * std::max(jtj(j, j), 1e-12);
      for (int j = 0; j < k; ++j)
        if (is_fixed[j]) a(j, j) = 1.0;  // decoupled, jtr entry is zero anyway
      Eigen::VectorXd step = a.ldlt().solve(jtr);
      Eigen::VectorXd pn = clamp_to_bounds(p - step, opts);
      for (int j = 0; j < k; ++j)
        if (is_fixed[j]) pn(j) = p(j);
      double cn = chi2_of(model, xs, ys, pn);
      if (cn < chi2) {
        double rel = (chi2 - cn) / std::max(chi2, 1e-300);
        p = pn;
        chi2 = cn;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (rel < opts.tolerance) out.converged = true;
        break;
      }
      lambda *= 8.0;
    }
    if (!improved) {
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }

  out.params = p;
  out.chi2 = chi2;

  // covariance from the final Jacobian, residual-variance scaled
  for (int i = 0; i < n; ++i) resid(i) = model(xs[i], p) - ys[i];
  for (int j = 0; j < k; ++j) {
    if (is_fixed[j]) {
      jac.col(j).setZero();
      continue;
    }
    double h = opts.fd_step_scale * std::max(std::abs(p(j)), 1.0);
    Eigen::VectorXd pp = p;
    pp(j) += h;
    for (int i = 0; i < n; ++i) jac(i, j) = (model(xs[i], pp) - (resid(i) + ys[i])) / h;
  }
  out.sigmas = Eigen::VectorXd::Zero(k);
  int free_count = 0;
  for (int j = 0; j < k; ++j)
    if (!is_fixed[j]) ++free_count;
  int dof = std::max(n - free_count, 1);
  double s2 = chi2 / dof;
  Eigen::MatrixXd jtj = jac.transpose() * jac;
  for (int j = 0; j < k; ++j)
    if (is_fixed[j]) jtj(j, j) = 1.0;
  Eigen::MatrixXd cov = jtj.ldlt().solve(Eigen::MatrixXd::Identity(k, k)) * s2;
  for (int j = 0; j < k; ++j)
    out.sigmas(j) = is_fixed[j] ? 0.0 : std::sqrt(std::max(cov(j, j), 0.0));
  return out;
}

FitResult fit_sine(const std::vector<double>& xs, const std::vector<double>& ys, double f0) {
  if (xs.size() < 5) throw std::invalid_argument("fit_sine: need at least 5 points");
  double ymin = *std::min_element(ys.begin(), ys.end());
  double ymax = *std::max_element(ys.begin(), ys.end());
  double y0 = 0.5 * (ymin + ymax);
  double a0 = std::max(0.5 * (ymax - ymin), 1e-12);
  double span = *std::max_element(xs.begin(), xs.end()) - *std::min_element(xs.begin(), xs.end());
  if (span <= 0.0) throw std::invalid_argument("fit_sine: degenerate x range");

  auto model = [](double x, const Eigen::VectorXd& p) {
    return p(3) + p(1) * std::sin(two_pi * p(0) * x + p(2));
  };

  FitResult best;
  best.chi2 = std::numeric_limits<double>::infinity();
  std::vector<double> seeds;
  if (f0 > 0.0) {
    seeds.push_back(f0);
  } else {
    // coarse grid: half a period up to ~one period per two samples
    double fmin = 0.5 / span;
    double fmax = 0.25 * xs.size() / span;
    for (int i = 0; i <= 60; ++i) seeds.push_back(fmin * std::pow(fmax / fmin, i / 60.0));
  }
  for (double fs : seeds) {
    for (double ph : {0.0, 1.5707963267948966, 3.141592653589793, 4.71238898038469}) {
      Eigen::VectorXd p0(4);
      p0 << fs, a0, ph, y0;
      FitResult r = least_squares_fit(model, xs, ys, p0);
      if (r.chi2 < best.chi2) best = r;
    }
  }
  // canonicalize to a >= 0, phase in [0, 2pi)
  if (best.params(1) < 0) {
    best.params(1) = -best.params(1);
    best.params(2) += 3.141592653589793;
  }
  best.params(2) = std::fmod(best.params(2), two_pi);
  if (best.params(2) < 0) best.params(2) += two_pi;
  if (best.params(0) < 0) {
    best.params(0) = -best.params(0);
    best.params(2) = std::fmod(two_pi + 3.141592653589793 - best.params(2), two_pi);
  }
  return best;
}

}  // namespace nvreg
