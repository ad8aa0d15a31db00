#include "nvreg/propagation.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "nvreg/algebra.hpp"

namespace nvreg {

double phase_offset(PulsePhase p) {
  switch (p) {
    case PulsePhase::x: return 0.0;
    case PulsePhase::y: return 0.5 * pi;
    case PulsePhase::minus_x: return pi;
    case PulsePhase::minus_y: return 1.5 * pi;
  }
  return 0.0;
}

double pulse_area(PulseKind k) {
  return k == PulseKind::pi ? pi : 0.5 * pi;
}

double pulse_duration_ns(PulseKind kind, double rabi_mhz) {
  if (rabi_mhz <= 0.0) throw std::invalid_argument("rabi must be positive");
  return 1000.0 * pulse_area(kind) / (two_pi * rabi_mhz);
}

PulseSegment make_pulse(PulseTarget target, PulseKind kind, PulsePhase phase,
                        double rabi_mhz, Envelope envelope) {
  PulseSegment p;
  p.target = target;
  p.kind = kind;
  p.phase = phase;
  p.envelope = envelope;
  p.rabi = rabi_mhz;
  p.duration =
      envelope == Envelope::instantaneous ? 0.0 : pulse_duration_ns(kind, rabi_mhz);
  return p;
}

void Sequence::add_pulse(const PulseSegment& p) {
  SequenceItem it;
  it.is_pulse = true;
  it.pulse = p;
  items.push_back(it);
}

void Sequence::add_free(double ns) {
  if (ns < -1e-9) throw std::invalid_argument("negative free evolution");
  if (ns <= 0.0) return;
  SequenceItem it;
  it.is_pulse = false;
  it.free_ns = ns;
  items.push_back(it);
}

void Sequence::append(const Sequence& other) {
  items.insert(items.end(), other.items.begin(), other.items.end());
}

double Sequence::total_duration() const {
  double t = 0.0;
  for (const auto& it : items) t += it.is_pulse ? it.pulse.duration : it.free_ns;
  return t;
}

double sine_envelope(double t_ns, double t_pulse_ns, double rabi_mhz,
                     double area_rad) {
  (void)rabi_mhz;
  if (t_ns < -1e-9 || t_ns > t_pulse_ns + 1e-9)
    throw std::domain_error("time outside pulse support");
  double t_pulse_us = 1e-3 * t_pulse_ns;
  return 0.5 * pi * area_rad / t_pulse_us * std::sin(pi * t_ns / t_pulse_ns);
}

namespace {

// peak envelope amplitude (rad/us) for the drive scalar range
double envelope_peak(const PulseSegment& p) {
  double t_us = 1e-3 * p.duration;
  double area = pulse_area(p.kind);
  if (p.envelope == Envelope::sine) return 0.5 * pi * area / t_us;
  return area / t_us;  // rectangular
}

double envelope_value(const PulseSegment& p, double t_loc_ns) {
  double area = pulse_area(p.kind);
  if (p.envelope == Envelope::sine)
    return sine_envelope(t_loc_ns, p.duration, p.rabi, area);
  return area / (1e-3 * p.duration);
}

Eigen::VectorXd transition_frame_diagonal(const std::array<double, 2>& carriers) {
  Mat sz2 = spin1_z() * spin1_z();
  Mat h = two_pi * carriers[0] * embed(sz2, Slot::nv1_electron) +
          two_pi * carriers[1] * embed(sz2, Slot::nv2_electron);
  return h.diagonal().real();
}

void scale_rows(const Eigen::VectorXcd& phases, Mat& block) {
  block.array().colwise() *= phases.array();
}

Eigen::VectorXcd frame_phases(const Eigen::VectorXd& htrans, double t_us,
                              bool dagger) {
  double s = dagger ? 1.0 : -1.0;
  return (cxd(0.0, s) * htrans.array().cast<cxd>() * t_us).exp().matrix();
}

}  // namespace

Mat propagate_static(const Mat& h_free, double t_ns,
                     const std::array<double, 2>& carriers_mhz, double t0_ns) {
  Eigen::VectorXd htrans = transition_frame_diagonal(carriers_mhz);
  double t0 = 1e-3 * t0_ns, t1 = t0 + 1e-3 * t_ns;
  Mat u = expm_herm(h_free, t1 - t0);
  scale_rows(frame_phases(htrans, t1, true), u);
  Mat v0 = u.transpose();
  scale_rows(frame_phases(htrans, t0, false), v0);
  return v0.transpose();
}

Propagator::Propagator(const PairModel& model, PropagationOptions opts)
    : model_(model), opts_(opts) {
  Eigen::SelfAdjointEigenSolver<Mat> es(model_.h_free);
  evecs_ = es.eigenvectors();
  evals_ = es.eigenvalues();
  htrans_ = transition_frame_diagonal(model_.carriers);
}

Mat Propagator::Family::eval(double c) const {
  double s = cmax > 0.0 ? c / cmax : 0.0;
  Mat acc = coeffs[0];
  if (coeffs.size() > 1) acc += s * coeffs[1];
  double tm2 = 1.0, tm1 = s;
  for (size_t m = 2; m < coeffs.size(); ++m) {
    double tm = 2.0 * s * tm1 - tm2;
    acc += tm * coeffs[m];
    tm2 = tm1;
    tm1 = tm;
  }
  return acc;
}

const Propagator::Family& Propagator::family_for(PulseTarget target,
                                                 double cmax,
                                                 double tau_us) const {
  auto key = std::make_tuple(static_cast<int>(target),
                             std::bit_cast<long long>(cmax),
                             std::bit_cast<long long>(tau_us));
  std::lock_guard<std::mutex> lock(family_mutex_);
  auto it = families_.find(key);
  if (it != families_.end()) return it->second;

  const Mat& m = opts_.drive.crosstalk
                     ? (opts_.drive.drive_nuclear ? model_.drive_full
                                                  : model_.drive_electron)
                     : model_.drive_qubit[static_cast<int>(target)];
  Mat h0 = model_.h_free;
  for (long i = 0; i < h0.rows(); ++i) h0(i, i) -= htrans_(i);

  int n = opts_.interp_nodes;
  Family fam;
  fam.cmax = cmax;
  fam.tau_us = tau_us;
  std::vector<Mat> samples(n);
  for (int k = 0; k < n; ++k) {
    double ck = cmax * std::cos(pi * (k + 0.5) / n);
    samples[k] = expm_herm(h0 + ck * m, tau_us);
  }
  fam.coeffs.resize(n);
  for (int j = 0; j < n; ++j) {
    Mat a = Mat::Zero(h0.rows(), h0.cols());
    for (int k = 0; k < n; ++k)
      a += std::cos(j * pi * (k + 0.5) / n) * samples[k];
    a *= 2.0 / n;
    if (j == 0) a *= 0.5;
    fam.coeffs[j] = a;
  }

  // runtime verification against the direct exponential; on failure drop the
  // interpolant so steps fall back to exact exponentials
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    double c = cmax * dist(rng);
    Mat direct = expm_herm(h0 + c * m, tau_us);
    worst = std::max(worst, frobenius_distance(fam.eval(c), direct));
  }
  if (worst > 1e-9 * std::sqrt(static_cast<double>(h0.rows()))) {
    std::fprintf(stderr,
                 "step interpolant check failed (residual %.3e), using exact "
                 "exponentials for this pulse family\n",
                 worst);
    fam.coeffs.clear();
  }
  return families_.emplace(key, std::move(fam)).first->second;
}

Mat Propagator::ideal_pulse(const PulseSegment& p) const {
  int tgt = static_cast<int>(p.target);
  int l0 = model_.qubit_levels[tgt][0];
  int l1 = model_.qubit_levels[tgt][1];
  double xi = phase_offset(p.phase) + (tgt == 0 ? opts_.xi1 : opts_.xi2);
  Mat g = Mat::Zero(3, 3);
  g(l0, l1) = std::exp(cxd(0.0, xi));
  g(l1, l0) = std::exp(cxd(0.0, -xi));
  Mat u3 = expm_herm(g, 0.5 * pulse_area(p.kind));
  Slot slot = tgt == 0 ? Slot::nv1_electron : Slot::nv2_electron;
  return embed(u3, slot);
}

void Propagator::apply_frame(double t_us, bool dagger, Mat& block) const {
  scale_rows(frame_phases(htrans_, t_us, dagger), block);
}

void Propagator::walk(const Sequence& seq, double t0_ns, Mat& block) const {
  double t_us = 1e-3 * t0_ns;
  for (const auto& item : seq.items) {
    if (!item.is_pulse) {
      double dt = 1e-3 * item.free_ns;
      double t1 = t_us + dt;
      apply_frame(t_us, false, block);
      block = evecs_.adjoint() * block;
      scale_rows(
          (cxd(0.0, -1.0) * evals_.array().cast<cxd>() * dt).exp().matrix(),
          block);
      block = evecs_ * block;
      apply_frame(t1, true, block);
      t_us = t1;
      continue;
    }
    const PulseSegment& p = item.pulse;
    if (p.envelope == Envelope::instantaneous) {
      block = ideal_pulse(p) * block;
      continue;
    }
    int tgt = static_cast<int>(p.target);
    double omega = two_pi * model_.carriers[tgt];
    double xi = phase_offset(p.phase) + (tgt == 0 ? opts_.xi1 : opts_.xi2);
    long n = std::max(1L, std::lround(std::ceil(p.duration * opts_.step_density -
                                                1e-9)));
    double tau_ns = p.duration / static_cast<double>(n);
    double tau_us = 1e-3 * tau_ns;
    double cmax = std::sqrt(2.0) * envelope_peak(p);
    const Family* fam = nullptr;
    Mat h0;
    const Mat* drive = nullptr;
    if (opts_.interpolate) {
      fam = &family_for(p.target, cmax, tau_us);
      if (fam->coeffs.empty()) fam = nullptr;
    }
    if (!fam) {
      h0 = model_.h_free;
      for (long j = 0; j < h0.rows(); ++j) h0(j, j) -= htrans_(j);
      drive = opts_.drive.crosstalk
                  ? (opts_.drive.drive_nuclear ? &model_.drive_full
                                               : &model_.drive_electron)
                  : &model_.drive_qubit[tgt];
    }
    double off = opts_.midpoint ? 0.5 : 0.0;
    Eigen::VectorXcd w = frame_phases(htrans_, tau_us, false);
    double t_first = t_us + 1e-3 * off * tau_ns;
    apply_frame(t_first, false, block);
    for (long i = 0; i < n; ++i) {
      double t_loc_ns = (static_cast<double>(i) + off) * tau_ns;
      double t_abs_us = t_us + 1e-3 * t_loc_ns;
      double c = std::sqrt(2.0) * envelope_value(p, t_loc_ns) *
                 std::cos(omega * t_abs_us + xi);
      if (i > 0) scale_rows(w, block);
      if (fam)
        block = fam->eval(c) * block;
      else
        block = expm_herm(h0 + c * (*drive), tau_us) * block;
    }
    double t_last = t_first + (n - 1) * tau_us;
    apply_frame(t_last, true, block);
    t_us += 1e-3 * p.duration;
  }
}

Mat Propagator::run(const Sequence& seq, double t0_ns) const {
  Mat u = Mat::Identity(model_.h_free.rows(), model_.h_free.cols());
  walk(seq, t0_ns, u);
  return u;
}

Mat Propagator::run_columns(const Sequence& seq, const Mat& columns,
                            double t0_ns) const {
  Mat block = columns;
  walk(seq, t0_ns, block);
  return block;
}

Mat propagate_driven(const PairModel& model, const Sequence& seq,
                     const PropagationOptions& opts) {
  return Propagator(model, opts).run(seq);
}

namespace {

Mat reduced_drive_generator(PulseTarget target, double xi) {
  // basis order (|01>, |00>, |11>, |10>); NV1 couples (0,2) and (1,3),
  // NV2 couples (0,1) and (2,3)
  Mat g = Mat::Zero(4, 4);
  auto set_pair = [&](int a, int b) {
    g(a, b) = std::exp(cxd(0.0, xi));
    g(b, a) = std::exp(cxd(0.0, -xi));
  };
  if (target == PulseTarget::nv1) {
    set_pair(0, 2);
    set_pair(1, 3);
  } else {
    set_pair(0, 1);
    set_pair(2, 3);
  }
  return g;
}

}  // namespace

Mat propagate_reduced(const ReducedModel& m, const Sequence& seq,
                      const PropagationOptions& opts) {
  Mat h_free = reduced_two_qubit_hamiltonian(m.delta1, m.delta2, m.g, 0.0, 0.0);
  Mat u = Mat::Identity(4, 4);
  for (const auto& item : seq.items) {
    if (!item.is_pulse) {
      u = expm_herm(h_free, 1e-3 * item.free_ns) * u;
      continue;
    }
    const PulseSegment& p = item.pulse;
    double xi = phase_offset(p.phase);
    Mat g = reduced_drive_generator(p.target, xi);
    if (p.envelope == Envelope::instantaneous) {
      u = expm_herm(g, 0.5 * pulse_area(p.kind)) * u;
      continue;
    }
    long n = std::max(1L, std::lround(std::ceil(p.duration * opts.step_density -
                                                1e-9)));
    double tau_ns = p.duration / static_cast<double>(n);
    double off = opts.midpoint ? 0.5 : 0.0;
    for (long i = 0; i < n; ++i) {
      double env = envelope_value(p, (static_cast<double>(i) + off) * tau_ns);
      u = expm_herm(h_free + 0.5 * env * g, 1e-3 * tau_ns) * u;
    }
  }
  return u;
}

}  // namespace nvreg
