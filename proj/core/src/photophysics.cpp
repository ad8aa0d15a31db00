#include "nvreg/photophysics.hpp"

#include <cmath>
#include <stdexcept>

#include "nvreg/algebra.hpp"
#include "nvreg/constants.hpp"

namespace nvreg {
namespace {

Eigen::Matrix<double, 7, 7> expm_real(const Eigen::Matrix<double, 7, 7>& g,
                                      double t_us) {
  Mat gc = (g * t_us).cast<cxd>();
  return expm(gc).real();
}

}  // namespace

RateTable gupta_rates() { return RateTable{}; }

RateTable adapted_isc_rates() {
  RateTable t;
  t.k_isc_ms0 = 3.004;
  t.k_isc_ms1 = 90.307;
  t.pump_beta = 1.938;
  return t;
}

Eigen::Matrix3d manifold_mixing(double d_mhz, double omega_e_mhz,
                                double theta_deg) {
  if (omega_e_mhz == 0.0 || theta_deg == 0.0)
    return Eigen::Matrix3d::Identity();
  double th = theta_deg * deg;
  // basis (+1, 0, -1)
  Eigen::Matrix3d sz = Eigen::Vector3d(1, 0, -1).asDiagonal();
  Eigen::Matrix3d sx;
  sx << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  sx /= std::sqrt(2.0);
  Eigen::Matrix3d h = d_mhz * sz * sz -
                      omega_e_mhz * (std::sin(th) * sx + std::cos(th) * sz);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h);
  Eigen::Matrix3d ovl = es.eigenvectors().cwiseAbs2();  // ovl(b, eig)

  // label each eigenvector by its dominant aligned level, greedily by overlap
  int label[3] = {-1, -1, -1};  // basis index -> eigenvector column
  bool used[3] = {false, false, false};
  for (int pick = 0; pick < 3; ++pick) {
    double best = -1;
    int bb = -1, bc = -1;
    for (int b = 0; b < 3; ++b) {
      if (label[b] >= 0) continue;
      for (int c = 0; c < 3; ++c) {
        if (used[c]) continue;
        if (ovl(b, c) > best) {
          best = ovl(b, c);
          bb = b;
          bc = c;
        }
      }
    }
    label[bb] = bc;
    used[bc] = true;
  }

  // reorder to ms order (0, -1, +1): basis indices 1, 2, 0
  const int ms_to_basis[3] = {1, 2, 0};
  Eigen::Matrix3d out;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      out(a, b) = ovl(ms_to_basis[b], label[ms_to_basis[a]]);
  return out;
}

Eigen::Matrix<double, 7, 7> RateModel::generator(bool pump_on) const {
  const Eigen::Matrix3d& mg = ground_mixing;
  Eigen::Matrix3d me = manifolds == MixedManifolds::both
                           ? excited_mixing
                           : Eigen::Matrix3d::Identity();
  const double k_isc[3] = {rates.k_isc_ms0, rates.k_isc_ms1, rates.k_isc_ms1};
  const double k_sg[3] = {rates.k_singlet_ms0, rates.k_singlet_ms1,
                          rates.k_singlet_ms1};

  Eigen::Matrix<double, 7, 7> g = Eigen::Matrix<double, 7, 7>::Zero();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double rad = 0, pump = 0;
      for (int j = 0; j < 3; ++j) {
        rad += rates.k_rad * me(a, j) * mg(b, j);
        pump += rates.pump_beta * rates.k_rad * mg(a, j) * me(b, j);
      }
      g(b, 3 + a) += rad;
      if (pump_on) g(3 + b, a) += pump;
    }
    double isc = 0, sg = 0;
    for (int j = 0; j < 3; ++j) {
      isc += k_isc[j] * me(a, j);
      sg += k_sg[j] * mg(a, j);
    }
    g(6, 3 + a) += isc;
    g(a, 6) += sg;
  }
  for (int j = 0; j < 7; ++j) g(j, j) -= g.col(j).sum();
  return g;
}

RateModel build_rate_model(const RateTable& rates, double b_mag_g,
                           double theta_deg, double d_gs_mhz,
                           MixedManifolds manifolds) {
  if (rates.k_isc_ms0 < 0 || rates.k_isc_ms1 < 0 || rates.k_singlet_ms0 < 0 ||
      rates.k_singlet_ms1 < 0 || rates.k_rad < 0 || rates.pump_beta < 0)
    throw std::invalid_argument("rate table entries must be non-negative");
  RateModel m;
  m.rates = rates;
  m.manifolds = manifolds;
  double omega_e = gamma_e_mhz_g * b_mag_g;
  m.ground_mixing = manifold_mixing(d_gs_mhz, omega_e, theta_deg);
  m.excited_mixing =
      manifold_mixing(d_gs_mhz * zfs_excited_ratio, omega_e, theta_deg);
  return m;
}

Populations thermal_populations() {
  Populations p = Populations::Zero();
  p(0) = p(1) = p(2) = 1.0 / 3.0;
  return p;
}

Populations pump_cycle(const RateModel& model, double laser_on_ns,
                       double wait_ns, const Populations& start) {
  if (laser_on_ns < 0 || wait_ns < 0)
    throw std::invalid_argument("durations must be non-negative");
  Populations p = start;
  if (laser_on_ns > 0)
    p = expm_real(model.generator(true), laser_on_ns * 1e-3) * p;
  if (wait_ns > 0)
    p = expm_real(model.generator(false), wait_ns * 1e-3) * p;
  return p;
}

InitSpamResult init_and_spam(const RateModel& model_at_b,
                             const RateModel& model_at_0, double laser_on_ns,
                             double wait_ns) {
  auto fidelity = [&](const RateModel& m) {
    Populations p = pump_cycle(m, laser_on_ns, wait_ns);
    return p(0) / (p(0) + p(1) + p(2));
  };
  InitSpamResult r;
  r.f_init_b = fidelity(model_at_b);
  r.f_init_0 = fidelity(model_at_0);
  double denom = 1.0 - r.f_init_0;
  if (denom < 1e-12) {
    r.perfect_reference = true;
    r.err_spam = 1.0;
  } else {
    r.err_spam = (1.0 - r.f_init_b) / denom;
  }
  return r;
}

namespace {

// photons collected over the readout window, proportional to the integrated
// excited-state population under pump
double readout_counts(const RateModel& model, Populations p, double window_ns) {
  const int steps = 64;
  double dt_us = window_ns * 1e-3 / steps;
  Eigen::Matrix<double, 7, 7> u = expm_real(model.generator(true), dt_us);
  double total = 0;
  for (int i = 0; i < steps; ++i) {
    p = u * p;
    total += (p(3) + p(4) + p(5)) * dt_us;
  }
  return total;
}

double rabi_contrast(const RateModel& model, const ContrastOptions& opts) {
  Populations init = pump_cycle(model, opts.laser_on_ns, opts.wait_ns);
  Populations flipped = init;
  std::swap(flipped(0), flipped(1));  // pi pulse on the 0 / -1 transition
  double bright = readout_counts(model, init, opts.readout_window_ns);
  double dark = readout_counts(model, flipped, opts.readout_window_ns);
  return (bright - dark) / bright;
}

}  // namespace

std::vector<ContrastPoint> relative_contrast(const RateTable& rates,
                                             const std::vector<double>& b_mag_g,
                                             double theta_deg,
                                             const ContrastOptions& opts) {
  std::vector<ContrastPoint> out;
  out.reserve(b_mag_g.size());
  for (double b : b_mag_g) {
    RateModel tilted =
        build_rate_model(rates, b, theta_deg, opts.d_gs_mhz, opts.manifolds);
    RateModel aligned =
        build_rate_model(rates, b, 0.0, opts.d_gs_mhz, opts.manifolds);
    ContrastPoint pt;
    pt.b_mag_g = b;
    pt.relative = rabi_contrast(tilted, opts) / rabi_contrast(aligned, opts);
    out.push_back(pt);
  }
  return out;
}

}  // namespace nvreg
