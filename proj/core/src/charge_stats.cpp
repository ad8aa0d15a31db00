#include "nvreg/charge_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nvreg/rng.hpp"

namespace nvreg {
namespace {

double log_poisson(int n, double lam) {
  if (lam <= 0.0) return n == 0 ? 0.0 : -745.0;
  return n * std::log(lam) - lam - std::lgamma(n + 1.0);
}

double poisson_pmf(int n, double lam) { return std::exp(log_poisson(n, lam)); }

double mixture_loglike(const PhotonHistogram& hist,
                       const Eigen::Vector3d& lam,
                       const Eigen::Vector3d& w) {
  double ll = 0.0;
  for (size_t n = 0; n < hist.counts.size(); ++n) {
    if (hist.counts[n] == 0) continue;
    double p = 0.0;
    for (int i = 0; i < 3; ++i)
      p += std::max(w(i), 0.0) * poisson_pmf(static_cast<int>(n), lam(i));
    ll += hist.counts[n] * std::log(std::max(p, 1e-300));
  }
  return ll;
}

double quantile(const PhotonHistogram& hist, double q) {
  long target = static_cast<long>(q * hist.total_shots);
  long acc = 0;
  for (size_t n = 0; n < hist.counts.size(); ++n) {
    acc += hist.counts[n];
    if (acc >= target) return static_cast<double>(n);
  }
  return static_cast<double>(hist.counts.size() - 1);
}

void sort_components(Eigen::Vector3d& lam, Eigen::Vector3d& w,
                     Eigen::Vector3d& slam, Eigen::Vector3d& sw) {
  std::array<int, 3> idx = {0, 1, 2};
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return lam(a) < lam(b); });
  Eigen::Vector3d l2, w2, sl2, sw2;
  for (int i = 0; i < 3; ++i) {
    l2(i) = lam(idx[static_cast<size_t>(i)]);
    w2(i) = w(idx[static_cast<size_t>(i)]);
    sl2(i) = slam(idx[static_cast<size_t>(i)]);
    sw2(i) = sw(idx[static_cast<size_t>(i)]);
  }
  lam = l2;
  w = w2;
  slam = sl2;
  sw = sw2;
}

// covariance from a central-difference Hessian of the negative log-likelihood
Eigen::MatrixXd fd_covariance(
    const std::function<double(const Eigen::VectorXd&)>& nll,
    const Eigen::VectorXd& x) {
  int m = static_cast<int>(x.size());
  Eigen::MatrixXd h(m, m);
  Eigen::VectorXd step(m);
  for (int i = 0; i < m; ++i) step(i) = 1e-4 * std::max(std::abs(x(i)), 1e-3);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      Eigen::VectorXd xa = x, xb = x, xc = x, xd = x;
      xa(i) += step(i); xa(j) += step(j);
      xb(i) += step(i); xb(j) -= step(j);
      xc(i) -= step(i); xc(j) += step(j);
      xd(i) -= step(i); xd(j) -= step(j);
      h(i, j) = h(j, i) =
          (nll(xa) - nll(xb) - nll(xc) + nll(xd)) / (4 * step(i) * step(j));
    }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
  if (lu.isInvertible()) cov = lu.inverse();
  return cov;
}

PoissonMixture fit_ml(const PhotonHistogram& hist, const MixtureOptions& opts) {
  PoissonMixture out;
  Eigen::Vector3d lam;
  if (opts.fix_lambdas) {
    lam = opts.fixed_lambdas;
  } else {
    lam << std::max(quantile(hist, 0.15), 0.05),
        std::max(quantile(hist, 0.5), 0.15),
        std::max(quantile(hist, 0.85), 0.3);
    for (int i = 1; i < 3; ++i)
      if (lam(i) <= lam(i - 1)) lam(i) = lam(i - 1) * 1.6 + 0.5;
  }
  Eigen::Vector3d w(1.0 / 3, 1.0 / 3, 1.0 / 3);

  double prev = mixture_loglike(hist, lam, w);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    Eigen::Vector3d resp_sum = Eigen::Vector3d::Zero();
    Eigen::Vector3d resp_n = Eigen::Vector3d::Zero();
    for (size_t n = 0; n < hist.counts.size(); ++n) {
      if (hist.counts[n] == 0) continue;
      Eigen::Vector3d r;
      for (int i = 0; i < 3; ++i)
        r(i) = w(i) * poisson_pmf(static_cast<int>(n), lam(i));
      double tot = r.sum();
      if (tot < 1e-300) continue;
      r *= hist.counts[n] / tot;
      resp_sum += r;
      resp_n += r * static_cast<double>(n);
    }
    w = resp_sum / static_cast<double>(hist.total_shots);
    if (!opts.fix_lambdas)
      for (int i = 0; i < 3; ++i)
        if (resp_sum(i) > 1e-12) lam(i) = resp_n(i) / resp_sum(i);
    double ll = mixture_loglike(hist, lam, w);
    if (std::abs(ll - prev) < opts.tolerance * (std::abs(prev) + 1.0)) {
      prev = ll;
      out.converged = true;
      break;
    }
    prev = ll;
  }
  out.iterations = it;
  if (it == opts.max_iterations) out.converged = true;  // EM is monotone

  // asymptotic sigmas from the observed information
  if (opts.fix_lambdas) {
    auto nll = [&](const Eigen::VectorXd& p) {
      Eigen::Vector3d wv(p(0), p(1), 1.0 - p(0) - p(1));
      return -mixture_loglike(hist, lam, wv);
    };
    Eigen::VectorXd x(2);
    x << w(0), w(1);
    Eigen::MatrixXd cov = fd_covariance(nll, x);
    out.weight_sigmas(0) = std::sqrt(std::max(cov(0, 0), 0.0));
    out.weight_sigmas(1) = std::sqrt(std::max(cov(1, 1), 0.0));
    out.weight_sigmas(2) = std::sqrt(std::max(
        cov(0, 0) + cov(1, 1) + 2 * cov(0, 1), 0.0));
  } else {
    auto nll = [&](const Eigen::VectorXd& p) {
      Eigen::Vector3d lv(p(0), p(1), p(2));
      Eigen::Vector3d wv(p(3), p(4), 1.0 - p(3) - p(4));
      return -mixture_loglike(hist, lv, wv);
    };
    Eigen::VectorXd x(5);
    x << lam(0), lam(1), lam(2), w(0), w(1);
    Eigen::MatrixXd cov = fd_covariance(nll, x);
    for (int i = 0; i < 3; ++i)
      out.lambda_sigmas(i) = std::sqrt(std::max(cov(i, i), 0.0));
    out.weight_sigmas(0) = std::sqrt(std::max(cov(3, 3), 0.0));
    out.weight_sigmas(1) = std::sqrt(std::max(cov(4, 4), 0.0));
    out.weight_sigmas(2) = std::sqrt(std::max(
        cov(3, 3) + cov(4, 4) + 2 * cov(3, 4), 0.0));
  }

  out.lambdas = lam;
  out.weights = w;
  out.log_likelihood = prev;
  return out;
}

PoissonMixture fit_ls(const PhotonHistogram& hist, const MixtureOptions& opts) {
  std::vector<double> xs(hist.counts.size()), ys(hist.counts.size());
  for (size_t n = 0; n < hist.counts.size(); ++n) {
    xs[n] = static_cast<double>(n);
    ys[n] = static_cast<double>(hist.counts[n]) /
            static_cast<double>(hist.total_shots);
  }
  auto model = [](double x, const Eigen::VectorXd& p) {
    double v = 0;
    for (int i = 0; i < 3; ++i)
      v += std::max(p(3 + i), 0.0) * poisson_pmf(static_cast<int>(x), p(i));
    return v;
  };
  Eigen::VectorXd p0(6);
  p0 << std::max(quantile(hist, 0.15), 0.05),
      std::max(quantile(hist, 0.5), 0.15),
      std::max(quantile(hist, 0.85), 0.3), 1.0 / 3, 1.0 / 3, 1.0 / 3;
  for (int i = 1; i < 3; ++i)
    if (p0(i) <= p0(i - 1)) p0(i) = p0(i - 1) * 1.6 + 0.5;
  FitOptions fopts;
  fopts.max_iterations = opts.max_iterations;
  fopts.lower = std::vector<double>{0, 0, 0, 0, 0, 0};
  if (opts.fix_lambdas) {
    for (int i = 0; i < 3; ++i) p0(i) = opts.fixed_lambdas(i);
    fopts.fixed = {0, 1, 2};
  }
  FitResult fit = least_squares_fit(model, xs, ys, p0, fopts);

  PoissonMixture out;
  out.converged = fit.converged;
  out.iterations = fit.iterations;
  Eigen::Vector3d lam(fit.params[0], fit.params[1], fit.params[2]);
  Eigen::Vector3d w(fit.params[3], fit.params[4], fit.params[5]);
  Eigen::Vector3d slam(fit.sigmas[0], fit.sigmas[1], fit.sigmas[2]);
  Eigen::Vector3d sw(fit.sigmas[3], fit.sigmas[4], fit.sigmas[5]);
  double wsum = w.sum();
  if (wsum > 0) {
    w /= wsum;
    sw /= wsum;
  }
  out.lambdas = lam;
  out.weights = w;
  out.lambda_sigmas = slam;
  out.weight_sigmas = sw;
  sort_components(out.lambdas, out.weights, out.lambda_sigmas,
                  out.weight_sigmas);
  out.log_likelihood = mixture_loglike(hist, out.lambdas, out.weights);
  return out;
}

}  // namespace

void PhotonHistogram::validate() const {
  long sum = 0;
  for (long c : counts) {
    if (c < 0) throw std::invalid_argument("negative histogram bin");
    sum += c;
  }
  if (sum != total_shots)
    throw std::invalid_argument("histogram bins do not sum to total shots");
}

PhotonHistogram PhotonHistogram::from_samples(const std::vector<int>& photons,
                                              double window_ms) {
  PhotonHistogram h;
  h.window_ms = window_ms;
  h.total_shots = static_cast<long>(photons.size());
  int top = 0;
  for (int p : photons) top = std::max(top, p);
  h.counts.assign(static_cast<size_t>(top) + 1, 0);
  for (int p : photons) h.counts[static_cast<size_t>(p)]++;
  return h;
}

PoissonMixture fit_poisson_mixture(const PhotonHistogram& hist,
                                   const MixtureOptions& opts) {
  hist.validate();
  if (hist.total_shots <= 0)
    throw std::invalid_argument("empty histogram");
  PoissonMixture out = opts.objective == MixtureObjective::max_likelihood
                           ? fit_ml(hist, opts)
                           : fit_ls(hist, opts);
  if (opts.objective == MixtureObjective::max_likelihood)
    sort_components(out.lambdas, out.weights, out.lambda_sigmas,
                    out.weight_sigmas);
  for (int i = 0; i < 2; ++i)
    if (out.lambdas(i + 1) < 1.05 * out.lambdas(i)) out.degenerate = true;
  return out;
}

namespace {

double next_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_poisson(std::mt19937_64& rng, double lam) {
  // product-of-uniforms method; fine for the photon rates in play
  int k = 0;
  double threshold = std::exp(-lam);
  double p = next_uniform(rng);
  while (p > threshold) {
    ++k;
    p *= next_uniform(rng);
  }
  return k;
}

}  // namespace

std::vector<std::pair<int, int>> sample_charge_shots(
    const ChargeShotModel& model, long n_shots, uint64_t seed) {
  if (std::abs(model.weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("sector weights must sum to 1");
  std::vector<std::pair<int, int>> shots;
  shots.reserve(static_cast<size_t>(n_shots));
  auto rng = job_rng(seed, 0);
  for (long s = 0; s < n_shots; ++s) {
    double u = next_uniform(rng);
    int sector = u < model.weights(0)
                     ? 0
                     : (u < model.weights(0) + model.weights(1) ? 1 : 2);
    int ni = sample_poisson(rng, model.lambda_init(sector));
    int nr = sample_poisson(rng, model.lambda_read(sector));
    shots.emplace_back(ni, nr);
  }
  return shots;
}

std::vector<ThresholdPoint> threshold_tradeoff(
    const std::vector<std::pair<int, int>>& shots,
    const std::vector<int>& thresholds) {
  if (shots.empty()) throw std::invalid_argument("no shots");
  std::vector<int> all_reads;
  all_reads.reserve(shots.size());
  for (const auto& s : shots) all_reads.push_back(s.second);
  PoissonMixture ref =
      fit_poisson_mixture(PhotonHistogram::from_samples(all_reads));

  std::vector<ThresholdPoint> out;
  out.reserve(thresholds.size());
  for (int t : thresholds) {
    std::vector<int> kept;
    for (const auto& s : shots)
      if (s.first >= t) kept.push_back(s.second);
    if (kept.empty())
      throw std::runtime_error("post-selection left no shots at threshold " +
                               std::to_string(t));
    MixtureOptions wopts;
    wopts.fix_lambdas = true;
    wopts.fixed_lambdas = ref.lambdas;
    PoissonMixture fit =
        fit_poisson_mixture(PhotonHistogram::from_samples(kept), wopts);
    ThresholdPoint pt;
    pt.n_thresh = t;
    pt.fidelity = fit.weights(2);
    pt.n_kept = static_cast<long>(kept.size());
    pt.relative_noise = std::sqrt(static_cast<double>(shots.size()) /
                                  static_cast<double>(kept.size()));
    out.push_back(pt);
  }
  return out;
}

AsymmetryResult deer_asymmetry(const FitResult& sine_fit) {
  if (!sine_fit.converged)
    throw std::invalid_argument("asymmetry needs a converged sine fit");
  AsymmetryResult r;
  double amp = std::abs(sine_fit.params[1]);
  if (amp < 1e-9) {
    r.undefined = true;
    return r;
  }
  r.value = std::abs(sine_fit.params[3]) / amp;
  return r;
}

}  // namespace nvreg
