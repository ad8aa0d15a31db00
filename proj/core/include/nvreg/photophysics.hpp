#pragma once

#include <Eigen/Dense>
#include <vector>

namespace nvreg {

// optical cycle rates in MHz (1/us); one column of the modeling table
struct RateTable {
  double k_isc_ms0 = 11.2;     // excited ms=0 -> singlet
  double k_isc_ms1 = 92.9;     // excited ms=+-1 -> singlet
  double k_singlet_ms0 = 4.9;  // singlet -> ground ms=0
  double k_singlet_ms1 = 2.03; // singlet -> ground ms=+-1
  double k_rad = 66.08;        // spin-conserving radiative decay
  double pump_beta = 1.215;    // laser pump multiplier on k_rad
};

RateTable gupta_rates();
RateTable adapted_isc_rates();

// which triplet manifolds get their spin channels redistributed by the
// field-tilted eigenbasis
enum class MixedManifolds { ground_only, both };

// squared-overlap matrix of the tilted triplet: rows are the new eigenlevels
// and columns the aligned levels, both in ms order (0, -1, +1); rows sum to 1
Eigen::Matrix3d manifold_mixing(double d_mhz, double omega_e_mhz,
                                double theta_deg);

// 7-level optical rate model: levels 0-2 ground (ms 0, -1, +1),
// 3-5 excited (ms 0, -1, +1), 6 singlet
struct RateModel {
  RateTable rates;
  Eigen::Matrix3d ground_mixing = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d excited_mixing = Eigen::Matrix3d::Identity();
  MixedManifolds manifolds = MixedManifolds::ground_only;

  // generator G with dp/dt = G p; columns sum to zero
  Eigen::Matrix<double, 7, 7> generator(bool pump_on) const;
};

// redistribute the spin-selective channels by squared overlaps of the
// tilted ground (and optionally excited) eigenstates; excited zero-field
// splitting is d_gs_mhz scaled by zfs_excited_ratio
RateModel build_rate_model(const RateTable& rates, double b_mag_g,
                           double theta_deg, double d_gs_mhz,
                           MixedManifolds manifolds =
                               MixedManifolds::ground_only);

using Populations = Eigen::Matrix<double, 7, 1>;

// equal ground-level mixture, everything else empty
Populations thermal_populations();

// pump for laser_on_ns, then free decay for wait_ns (exact matrix
// exponentials); conserves total population
Populations pump_cycle(const RateModel& model, double laser_on_ns,
                       double wait_ns,
                       const Populations& start = thermal_populations());

struct InitSpamResult {
  double f_init_b = 0;      // spin init fidelity at field
  double f_init_0 = 0;      // reference at zero field
  double err_spam = 1;      // error ratio (1 - F(B)) / (1 - F(0))
  bool perfect_reference = false;  // F(0) = 1, ratio undefined
};

// initialization fidelity p0/(p0+p-1+p+1) after the pump cycle for both
// models and their error ratio
InitSpamResult init_and_spam(const RateModel& model_at_b,
                             const RateModel& model_at_0,
                             double laser_on_ns = 3000.0,
                             double wait_ns = 1000.0);

struct ContrastPoint {
  double b_mag_g = 0;
  double relative = 1;  // misaligned / aligned readout contrast
};

struct ContrastOptions {
  double laser_on_ns = 3000.0;
  double wait_ns = 1000.0;
  double readout_window_ns = 300.0;
  double d_gs_mhz = 2870.0;
  MixedManifolds manifolds = MixedManifolds::ground_only;
};

// simulated Rabi-contrast ratio of a misaligned NV (at theta_deg) to an
// aligned one versus field magnitude
std::vector<ContrastPoint> relative_contrast(const RateTable& rates,
                                             const std::vector<double>& b_mag_g,
                                             double theta_deg,
                                             const ContrastOptions& opts = {});

}  // namespace nvreg
