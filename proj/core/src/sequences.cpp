#include "nvreg/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "nvreg/algebra.hpp"
#include "nvreg/parallel.hpp"

namespace nvreg {

PulsePhase xy8_phase(int k) {
  static const PulsePhase pattern[8] = {
      PulsePhase::x, PulsePhase::y, PulsePhase::x, PulsePhase::y,
      PulsePhase::y, PulsePhase::x, PulsePhase::y, PulsePhase::x};
  return pattern[((k % 8) + 8) % 8];
}

namespace {

struct PulseEvent {
  double center_ns;
  PulseSegment pulse;
};

// lay out centered pulses into an ordered schedule, erroring on overlap
Sequence schedule_events(std::vector<PulseEvent> events, double total_ns) {
  std::stable_sort(events.begin(), events.end(),
                   [](const PulseEvent& a, const PulseEvent& b) {
                     return a.center_ns < b.center_ns;
                   });
  Sequence seq;
  double t = 0.0;
  for (const auto& ev : events) {
    double w = ev.pulse.duration;
    double left = ev.center_ns - 0.5 * w;
    if (left < t - 1e-9)
      throw std::invalid_argument("pulse collision in schedule");
    seq.add_free(left - t);
    seq.add_pulse(ev.pulse);
    t = left + w;
  }
  if (total_ns < t - 1e-9)
    throw std::invalid_argument("schedule exceeds its body duration");
  seq.add_free(total_ns - t);
  return seq;
}

// NV2 centers sit tau2 before the tau1 grid points, shifted one period for
// negative tau2 so the body stays [0, n_pi*tau1]
double nv2_center(int k, double tau1_ns, double tau2_ns) {
  double base = tau2_ns >= 0.0 ? (k + 1) * tau1_ns : k * tau1_ns;
  return base - tau2_ns;
}

}  // namespace

Sequence build_xy8(PulseTarget target, double tau1_ns, int n_xy,
                   double rabi_mhz, Envelope envelope) {
  if (tau1_ns <= 0.0) throw std::invalid_argument("tau1 must be positive");
  if (n_xy < 1) throw std::invalid_argument("n_xy must be >= 1");
  PulseSegment proto =
      make_pulse(target, PulseKind::pi, PulsePhase::x, rabi_mhz, envelope);
  if (proto.duration > tau1_ns)
    throw std::invalid_argument("pi pulse longer than tau1");
  std::vector<PulseEvent> events;
  int n_pulses = 8 * n_xy;
  for (int k = 0; k < n_pulses; ++k) {
    PulseSegment p = proto;
    p.phase = xy8_phase(k);
    events.push_back({(k + 0.5) * tau1_ns, p});
  }
  return schedule_events(std::move(events), n_pulses * tau1_ns);
}

Sequence build_sqrt_zz(double tau1_ns, double tau2_ns, int n_pi,
                       double rabi_mhz, Envelope envelope) {
  if (tau1_ns <= 0.0) throw std::invalid_argument("tau1 must be positive");
  if (n_pi < 1) throw std::invalid_argument("n_pi must be >= 1");
  if (tau2_ns < -0.5 * tau1_ns - 1e-9 || tau2_ns > 0.5 * tau1_ns + 1e-9)
    throw std::invalid_argument("tau2 outside [-tau1/2, tau1/2]");
  std::vector<PulseEvent> events;
  for (int k = 0; k < n_pi; ++k) {
    PulseSegment p1 =
        make_pulse(PulseTarget::nv1, PulseKind::pi, xy8_phase(k), rabi_mhz,
                   envelope);
    events.push_back({(k + 0.5) * tau1_ns, p1});
    PulseSegment p2 =
        make_pulse(PulseTarget::nv2, PulseKind::pi, xy8_phase(k), rabi_mhz,
                   envelope);
    events.push_back({nv2_center(k, tau1_ns, tau2_ns), p2});
  }
  return schedule_events(std::move(events), n_pi * tau1_ns);
}

AnalyticGate analytic_gate_unitary(double tau1_ns, double tau2_ns, int n_pi,
                                   double g, double delta1, double delta2) {
  if (tau1_ns <= 0.0) throw std::invalid_argument("tau1 must be positive");
  struct Flip {
    double t_ns;
    int nv;
  };
  std::vector<Flip> flips;
  for (int k = 0; k < n_pi; ++k) {
    flips.push_back({(k + 0.5) * tau1_ns, 0});
    flips.push_back({nv2_center(k, tau1_ns, tau2_ns), 1});
  }
  std::stable_sort(flips.begin(), flips.end(),
                   [](const Flip& a, const Flip& b) { return a.t_ns < b.t_ns; });

  // time-ordered product of the pi rotations on each qubit; identical phase
  // patterns walk both trains, and the trains commute across qubits
  std::array<Mat, 2> train{Mat::Identity(2, 2), Mat::Identity(2, 2)};
  for (int k = 0; k < n_pi; ++k) {
    double xi = phase_offset(xy8_phase(k));
    Mat u(2, 2);
    u << 0.0, cxd(0.0, -1.0) * std::exp(cxd(0.0, xi)),
        cxd(0.0, -1.0) * std::exp(cxd(0.0, -xi)), 0.0;
    for (auto& t : train) t = u * t;
  }

  // basis order (|01>, |00>, |11>, |10>)
  Eigen::Vector4d d;
  d << delta2, 0.0, delta1 + delta2 - g, delta1;
  Eigen::Vector4d phase = Eigen::Vector4d::Zero();
  AnalyticGate out;
  double t_prev = 0.0;
  auto advance = [&](double t_now) {
    double dt_ns = t_now - t_prev;
    phase += d * (1e-3 * dt_ns);
    Mat h = Mat::Zero(4, 4);
    h.diagonal() = d.cast<cxd>();
    out.period_h.push_back(h);
    out.period_ns.push_back(dt_ns);
    t_prev = t_now;
  };
  for (const auto& f : flips) {
    advance(f.t_ns);
    if (f.nv == 0) {
      std::swap(d(0), d(2));
      std::swap(d(1), d(3));
    } else {
      std::swap(d(0), d(1));
      std::swap(d(2), d(3));
    }
  }
  advance(n_pi * tau1_ns);

  // physical unitary: pulse-train product times the toggled diagonal phases,
  // basis (|01>, |00>, |11>, |10>) with qubit labels (t, c) per index
  const int tq[4] = {0, 0, 1, 1};
  const int cq[4] = {1, 0, 1, 0};
  out.unitary = Mat::Zero(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      out.unitary(r, c) = train[0](tq[r], tq[c]) * train[1](cq[r], cq[c]) *
                          std::exp(cxd(0.0, -phase(c)));
  return out;
}

namespace {

Mat sigma_target(const PairModel& m, PulseTarget t, bool want_y) {
  int i = static_cast<int>(t);
  int l0 = m.qubit_levels[i][0], l1 = m.qubit_levels[i][1];
  Mat s = Mat::Zero(3, 3);
  if (want_y) {
    s(l0, l1) = cxd(0.0, -1.0);
    s(l1, l0) = cxd(0.0, 1.0);
  } else {
    s(l0, l1) = 1.0;
    s(l1, l0) = 1.0;
  }
  return embed(s, i == 0 ? Slot::nv1_electron : Slot::nv2_electron);
}

double mean_expectation(const Mat& op, const Mat& columns) {
  double v = 0.0;
  for (long c = 0; c < columns.cols(); ++c)
    v += (columns.col(c).adjoint() * op * columns.col(c))(0, 0).real();
  return v / static_cast<double>(columns.cols());
}

}  // namespace

DeerResult deer_scan(const PairModel& model, double tau1_ns,
                     const std::vector<double>& tau2_ns, int n_pi,
                     const DeerOptions& opts) {
  opts.mixture.validate();
  int tgt = static_cast<int>(opts.target);
  int ctrl = 1 - tgt;
  // weight slots: (p--, p-0, p0-, p00); slot 1 means NV2 neutral
  double w_full = opts.mixture.weights[0];
  double w_ctrl0 = opts.mixture.weights[ctrl == 1 ? 1 : 2];
  double w_tgt0 = opts.mixture.weights[tgt == 1 ? 1 : 2] +
                  opts.mixture.weights[3];
  bool need_g0 = w_ctrl0 > 0.0;

  Propagator prop(model, opts.prop);
  PairModel model_g0;
  std::unique_ptr<Propagator> prop_g0;
  if (need_g0) {
    model_g0 = with_coupling(model, 0.0);
    prop_g0 = std::make_unique<Propagator>(model_g0, opts.prop);
  }
  Mat sigma = sigma_target(model, opts.target,
                           opts.projection == DeerProjection::sigma_y);
  Mat cols0 = initial_columns(model);
  PulseTarget control_t = tgt == 0 ? PulseTarget::nv2 : PulseTarget::nv1;
  double c0 = opts.mixture.nv0_sigma();

  DeerResult res;
  res.tau2_ns = tau2_ns;
  res.t_evol_us.resize(tau2_ns.size());
  long npts = static_cast<long>(tau2_ns.size());
  res.signal = parallel_map<double>(npts, [&](long i) {
    double t2 = tau2_ns[static_cast<size_t>(i)];
    Sequence seq;
    if (opts.control_state == 1)
      seq.add_pulse(make_pulse(control_t, PulseKind::pi, PulsePhase::x,
                               opts.rabi_mhz, opts.envelope));
    seq.add_pulse(make_pulse(opts.target, PulseKind::pi_half, PulsePhase::x,
                             opts.rabi_mhz, opts.envelope));
    seq.append(build_sqrt_zz(tau1_ns, t2, n_pi, opts.rabi_mhz, opts.envelope));
    double s_full = mean_expectation(sigma, prop.run_columns(seq, cols0));
    double s_g0 = 0.0;
    if (need_g0)
      s_g0 = mean_expectation(sigma, prop_g0->run_columns(seq, cols0));
    return w_full * s_full + w_ctrl0 * s_g0 + w_tgt0 * c0;
  });
  for (size_t i = 0; i < tau2_ns.size(); ++i)
    res.t_evol_us[i] = 1e-3 * n_pi * tau2_ns[i];

  if (tau2_ns.size() >= 5) {  // short probes skip the frequency extraction
    res.fit = fit_sine(res.t_evol_us, res.signal);
    if (!res.fit.converged)
      throw std::runtime_error("sine fit did not converge in DEER scan");
    res.nu_dip_mhz = res.fit.params[0];
    res.nu_dip_sigma = res.fit.sigmas[0];
    res.amplitude = res.fit.params[1];
    res.offset = res.fit.params[3];
  }
  return res;
}

GateCalibration calibrate_tau2(const PairModel& model, double tau1_ns, int n_pi,
                               const std::vector<double>& tau2_ns,
                               const CalibrationOptions& opts) {
  if (tau2_ns.size() < 5)
    throw std::invalid_argument("calibration sweep too short");
  Propagator prop(model, opts.prop);
  Mat cols0 = initial_columns(model);
  long npts = static_cast<long>(tau2_ns.size());
  std::vector<double> signal = parallel_map<double>(npts, [&](long i) {
    double t2 = tau2_ns[static_cast<size_t>(i)];
    Sequence seq;
    for (int nv = 0; nv < 2; ++nv)
      seq.add_pulse(make_pulse(nv == 0 ? PulseTarget::nv1 : PulseTarget::nv2,
                               PulseKind::pi_half, PulsePhase::x, opts.rabi_mhz,
                               opts.envelope));
    Sequence body = build_sqrt_zz(tau1_ns, t2, n_pi, opts.rabi_mhz,
                                  opts.envelope);
    for (int r = 0; r < opts.n_rep; ++r) seq.append(body);
    for (int nv = 0; nv < 2; ++nv)
      seq.add_pulse(make_pulse(nv == 0 ? PulseTarget::nv1 : PulseTarget::nv2,
                               PulseKind::pi_half, PulsePhase::x, opts.rabi_mhz,
                               opts.envelope));
    Mat cols = prop.run_columns(seq, cols0);
    return povm_readout(model, electron_density_from_columns(cols));
  });

  std::vector<double> tau2_us(tau2_ns.size());
  for (size_t i = 0; i < tau2_ns.size(); ++i) tau2_us[i] = 1e-3 * tau2_ns[i];
  GateCalibration cal;
  cal.tau1_ns = tau1_ns;
  cal.n_pi = n_pi;
  cal.fit = fit_sine(tau2_us, signal);
  if (!cal.fit.converged)
    throw std::runtime_error("sine fit did not converge in tau2 calibration");
  double f = cal.fit.params[0], a = cal.fit.params[1], ph = cal.fit.params[2];
  if (f <= 0.0) throw std::runtime_error("calibration fit frequency invalid");
  // minima of y0 + a sin(2 pi f t + ph); skip the minimum at tau2 ~ 0
  double theta = a > 0.0 ? -0.5 * pi : 0.5 * pi;
  double eps = 0.25 / f;
  double k = std::ceil((eps * two_pi * f - theta + ph) / two_pi);
  double tau_min_us = (theta - ph + two_pi * k) / (two_pi * f);
  double max_tau = *std::max_element(tau2_us.begin(), tau2_us.end());
  if (tau_min_us > max_tau * 1.05 + 1e-12)
    throw std::runtime_error("sweep does not reach the fitted minimum");
  cal.tau2_sqrtzz_ns = 1e3 * tau_min_us;
  cal.t_evol_us = n_pi * tau_min_us;
  cal.nu_dip_mhz = 1.0 / (4.0 * cal.t_evol_us);
  cal.nu_dip_sigma = cal.fit.sigmas[0] / (opts.n_rep * n_pi);
  return cal;
}

Tau1Scan scan_tau1(const PairModel& model, const std::vector<double>& tau1_ns,
                   int n_xy, double rabi_mhz, PulseTarget target,
                   Envelope envelope, const PropagationOptions& prop_opts) {
  Propagator prop(model, prop_opts);
  Mat cols0 = initial_columns(model);
  int tgt = static_cast<int>(target);
  Mat p_ground = Mat::Zero(3, 3);
  p_ground(model.qubit_levels[tgt][0], model.qubit_levels[tgt][0]) = 1.0;
  Mat proj = embed(p_ground,
                   tgt == 0 ? Slot::nv1_electron : Slot::nv2_electron);

  Tau1Scan scan;
  scan.tau1_ns = tau1_ns;
  long npts = static_cast<long>(tau1_ns.size());
  scan.survival = parallel_map<double>(npts, [&](long i) {
    double t1 = tau1_ns[static_cast<size_t>(i)];
    Sequence seq;
    seq.add_pulse(make_pulse(target, PulseKind::pi_half, PulsePhase::x,
                             rabi_mhz, envelope));
    seq.append(build_xy8(target, t1, n_xy, rabi_mhz, envelope));
    seq.add_pulse(make_pulse(target, PulseKind::pi_half, PulsePhase::minus_x,
                             rabi_mhz, envelope));
    return mean_expectation(proj, prop.run_columns(seq, cols0));
  });
  size_t best = 0;
  for (size_t i = 1; i < scan.survival.size(); ++i)
    if (scan.survival[i] > scan.survival[best]) best = i;
  scan.recommended_tau1_ns = tau1_ns.empty() ? 0.0 : tau1_ns[best];
  return scan;
}

}  // namespace nvreg
