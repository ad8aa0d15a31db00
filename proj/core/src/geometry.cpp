#include "nvreg/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "nvreg/algebra.hpp"

namespace nvreg {

namespace {

Mat electron_hamiltonian(double omega_e, double theta_deg, double phi_deg,
                         double d, double e) {
  const double th = theta_deg * deg;
  const double ph = phi_deg * deg;
  const Mat sx = spin1_x();
  const Mat sy = spin1_y();
  const Mat sz = spin1_z();
  return d * sz * sz + e * (sx * sx - sy * sy) +
         omega_e * (std::sin(th) * std::cos(ph) * sx +
                    std::sin(th) * std::sin(ph) * sy + std::cos(th) * sz);
}

}  // namespace

std::pair<double, double> forward_transitions(double omega_e, double theta_deg,
                                              double phi_deg, double d,
                                              double e) {
  Eigen::SelfAdjointEigenSolver<Mat> es(
      electron_hamiltonian(omega_e, theta_deg, phi_deg, d, e));
  const auto& ev = es.eigenvalues();
  return {ev(1) - ev(0), ev(2) - ev(0)};
}

OdmrSolution solve_field_from_odmr(double nu1, double nu2, double d, double e,
                                   double phi_deg) {
  if (!(nu1 < nu2))
    throw std::invalid_argument("solve_field_from_odmr: requires nu1 < nu2");

  const double s = nu1 * nu1 + nu2 * nu2 - nu1 * nu2;
  const double radicand = (s - d * d) / 3.0 - e * e;
  if (radicand < 0.0) throw negative_radicand_error(radicand);

  OdmrSolution out;
  out.omega_e = std::sqrt(radicand);
  if (out.omega_e < 1e-9) {
    // zero field: both transitions at d, angle meaningless
    out.theta = 0.0;
    out.theta_alt = 180.0;
    return out;
  }

  // trace invariant of the characteristic polynomial
  const double hval =
      (7.0 * d * d * d +
       2.0 * (nu1 + nu2) *
           (2.0 * (nu1 * nu1 + nu2 * nu2) - 5.0 * nu1 * nu2 - 9.0 * e * e) -
       3.0 * d * (nu1 * nu1 + nu2 * nu2 - nu1 * nu2 + 9.0 * e * e)) /
      (9.0 * (s - d * d - 3.0 * e * e));
  const double c2phi = std::cos(2.0 * phi_deg * deg);
  const double cos2t =
      std::clamp((hval - e * c2phi) / (d - e * c2phi), -1.0, 1.0);
  out.theta = 0.5 * std::acos(cos2t) / deg;
  out.theta_alt = 180.0 - out.theta;

  // cross-check against the eigensolver; polish with damped newton if the
  // closed form is off, keeping the numeric root when they disagree
  auto residual = [&](double w, double t, double& r1, double& r2) {
    auto [f1, f2] = forward_transitions(w, t, phi_deg, d, e);
    r1 = f1 - nu1;
    r2 = f2 - nu2;
    return std::max(std::abs(r1), std::abs(r2));
  };
  double r1 = 0.0, r2 = 0.0;
  const double mismatch = residual(out.omega_e, out.theta, r1, r2);
  if (mismatch <= 1e-10 || out.theta < 1e-7 || out.theta > 90.0 - 1e-7)
    return out;
  out.refined = mismatch > 0.1;

  double w = out.omega_e, t = out.theta;
  double best_w = w, best_t = t, best_res = mismatch;
  for (int it = 0; it < 80; ++it) {
    const double res = residual(w, t, r1, r2);
    if (res < best_res) {
      best_res = res;
      best_w = w;
      best_t = t;
    }
    if (res < 1e-12) break;
    const double hw = 1e-7 * std::max(std::abs(w), 1.0);
    const double ht = 1e-7 * std::max(std::abs(t), 1.0);
    double a1, a2, b1, b2;
    residual(w + hw, t, a1, a2);
    residual(w - hw, t, b1, b2);
    const double j11 = (a1 - b1) / (2.0 * hw), j21 = (a2 - b2) / (2.0 * hw);
    residual(w, t + ht, a1, a2);
    residual(w, t - ht, b1, b2);
    const double j12 = (a1 - b1) / (2.0 * ht), j22 = (a2 - b2) / (2.0 * ht);
    const double det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-14) break;
    double dw = (j22 * r1 - j12 * r2) / det;
    double dt = (-j21 * r1 + j11 * r2) / det;
    // keep steps physical
    const double cap_w = 0.2 * std::max(std::abs(w), 1.0);
    const double cap_t = 5.0;
    const double scale =
        std::max({1.0, std::abs(dw) / cap_w, std::abs(dt) / cap_t});
    w -= dw / scale;
    t -= dt / scale;
    t = std::clamp(t, 1e-7, 90.0 - 1e-7);
    w = std::max(w, 1e-9);
  }
  const double final_res = residual(w, t, r1, r2);
  if (final_res < best_res) {
    best_w = w;
    best_t = t;
    best_res = final_res;
  }
  if (best_res < mismatch) {
    out.omega_e = best_w;
    out.theta = best_t;
    out.theta_alt = 180.0 - best_t;
  }
  return out;
}

AzimuthSolution solve_second_angle(double theta_deg, double theta_b_deg,
                                   double beta_deg) {
  const double st = std::sin(theta_deg * deg);
  const double sb = std::sin(beta_deg * deg);
  if (std::abs(st * sb) < 1e-9)
    throw std::domain_error(
        "solve_second_angle: azimuth undefined when the field or the second "
        "axis is along the reference axis");
  const double num = std::cos(theta_b_deg * deg) -
                     std::cos(theta_deg * deg) * std::cos(beta_deg * deg);
  double c = num / (st * sb);
  if (std::abs(c) > 1.0 + 1e-9)
    throw std::domain_error(
        "solve_second_angle: inconsistent angle triple, |cos phi| = " +
        std::to_string(std::abs(c)));
  c = std::clamp(c, -1.0, 1.0);
  AzimuthSolution out;
  out.phi = std::acos(c) / deg;
  out.sign_ambiguous = out.phi > 1e-9 && out.phi < 180.0 - 1e-9;
  return out;
}

double distance_bound(double nu_dip_mhz) {
  if (!(nu_dip_mhz > 0.0))
    throw std::domain_error("distance_bound: coupling must be positive");
  constexpr double mu0_over_4pi = 1e-7;          // T^2 m^3 / J
  constexpr double hbar = 1.054571817e-34;       // J s
  constexpr double gamma_e_si = 2.8024e10;       // cyclic Hz / T
  const double gamma_rad = two_pi * gamma_e_si;  // rad / (s T)
  const double nu_hz = nu_dip_mhz * 1e6;
  const double r3 =
      2.0 * mu0_over_4pi * gamma_rad * gamma_rad * hbar / (two_pi * nu_hz);
  return std::cbrt(r3) * 1e9;
}

}  // namespace nvreg
