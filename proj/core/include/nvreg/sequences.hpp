#pragma once

#include <vector>

#include "nvreg/fit.hpp"
#include "nvreg/propagation.hpp"
#include "nvreg/readout.hpp"

namespace nvreg {

// robust decoupling phase pattern, repeating every 8 pulses
PulsePhase xy8_phase(int k);

// decoupling train on one NV: pi-pulse centers at tau1/2 + k tau1 for
// k = 0..8*n_xy-1, total span 8*n_xy*tau1
Sequence build_xy8(PulseTarget target, double tau1_ns, int n_xy,
                   double rabi_mhz, Envelope envelope = Envelope::sine);

// interleaved echo block on both NVs forming the entangling gate body:
// NV1 centers at (k+1/2) tau1, NV2 centers offset by tau2 from the NV1 grid
// (at (k+1) tau1 - tau2), body [0, n_pi*tau1] for any tau2
Sequence build_sqrt_zz(double tau1_ns, double tau2_ns, int n_pi,
                       double rabi_mhz, Envelope envelope = Envelope::sine);

// closed-form gate for instantaneous pulses in the two-qubit basis order
// (|01>, |00>, |11>, |10>): the pulse-train product times the toggled
// diagonal evolution; diagonal up to a global sign when n_pi % 4 == 0
struct AnalyticGate {
  Mat unitary;                    // 4x4
  std::vector<Mat> period_h;      // per-interval diagonal Hamiltonians, rad/us
  std::vector<double> period_ns;  // matching interval durations
};

// g, delta1, delta2 angular rad/us
AnalyticGate analytic_gate_unitary(double tau1_ns, double tau2_ns, int n_pi,
                                   double g, double delta1, double delta2);

enum class DeerProjection { sigma_x, sigma_y };

struct DeerOptions {
  DeerProjection projection = DeerProjection::sigma_x;
  int control_state = 1;                 // 0 or 1
  PulseTarget target = PulseTarget::nv1;
  double rabi_mhz = 20.0;
  Envelope envelope = Envelope::instantaneous;
  ChargeMixture mixture;                 // defaults to pure NV-NV-
  PropagationOptions prop;
};

struct DeerResult {
  std::vector<double> tau2_ns;
  std::vector<double> t_evol_us;  // n_pi * tau2
  std::vector<double> signal;
  FitResult fit;                  // y0 + a sin(2 pi f t_evol + phi)
  double nu_dip_mhz = 0.0;        // fitted frequency in the t_evol domain
  double nu_dip_sigma = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
};

DeerResult deer_scan(const PairModel& model, double tau1_ns,
                     const std::vector<double>& tau2_ns, int n_pi,
                     const DeerOptions& opts = {});

struct GateCalibration {
  double tau1_ns = 0.0;
  double tau2_sqrtzz_ns = 0.0;  // first nonzero minimum of the fitted sine
  int n_pi = 0;
  double t_evol_us = 0.0;       // n_pi * tau2_sqrtzz
  double nu_dip_mhz = 0.0;      // 1 / (4 t_evol)
  double nu_dip_sigma = 0.0;
  FitResult fit;
};

struct CalibrationOptions {
  int n_rep = 4;
  double rabi_mhz = 20.0;
  Envelope envelope = Envelope::instantaneous;
  PropagationOptions prop;
};

GateCalibration calibrate_tau2(const PairModel& model, double tau1_ns, int n_pi,
                               const std::vector<double>& tau2_ns,
                               const CalibrationOptions& opts = {});

struct Tau1Scan {
  std::vector<double> tau1_ns;
  std::vector<double> survival;
  double recommended_tau1_ns = 0.0;  // argmax survival
};

Tau1Scan scan_tau1(const PairModel& model, const std::vector<double>& tau1_ns,
                   int n_xy, double rabi_mhz,
                   PulseTarget target = PulseTarget::nv1,
                   Envelope envelope = Envelope::sine,
                   const PropagationOptions& prop = {});

}  // namespace nvreg
