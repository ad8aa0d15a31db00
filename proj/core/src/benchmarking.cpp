#include "nvreg/benchmarking.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "nvreg/algebra.hpp"
#include "nvreg/parallel.hpp"
#include "nvreg/propagation.hpp"
#include "nvreg/rng.hpp"

namespace nvreg {

DecayRecord fit_decay(const std::vector<double>& xs,
                      const std::vector<double>& ys,
                      std::optional<double> fix_y0, int n_qubits) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("decay series length mismatch");
  if (xs.size() < 4)
    throw std::invalid_argument("decay fit needs at least 4 points");
  if (n_qubits != 1 && n_qubits != 2)
    throw std::invalid_argument("decay record is for 1 or 2 qubits");

  DecayRecord rec;
  rec.xs = xs;
  rec.ys = ys;
  rec.n_qubits = n_qubits;

  double ymin = *std::min_element(ys.begin(), ys.end());
  double ymax = *std::max_element(ys.begin(), ys.end());
  if (ymax - ymin < 1e-9) {
    // constant survival carries no decay information; p = 1 exactly
    rec.p = 1.0;
    rec.y0 = fix_y0.value_or(0.0);
    rec.a = ymax - rec.y0;
    rec.fit.params = Eigen::Vector3d(rec.p, rec.a, rec.y0);
    rec.fit.sigmas = Eigen::Vector3d::Zero();
    rec.fit.converged = true;
    return rec;
  }

  auto model = [](double x, const Eigen::VectorXd& q) {
    return q(2) + q(1) * std::pow(std::max(q(0), 1e-9), x);
  };
  double y0_0 = fix_y0.value_or(std::max(0.0, ymin - 0.1 * (ymax - ymin)));
  double span = xs.back() - xs.front();
  double p0 = 0.9;
  double top = ys.front() - y0_0, tail = ys.back() - y0_0;
  if (top > 1e-12 && tail > 1e-12 && span > 0)
    p0 = std::min(std::max(std::pow(tail / top, 1.0 / span), 0.05), 0.9999);
  double a0 = top > 1e-12 ? top / std::pow(p0, xs.front()) : ymax - y0_0;

  Eigen::VectorXd q0(3);
  q0 << p0, a0, y0_0;
  FitOptions fopts;
  fopts.lower = {1e-9, -10.0, -10.0};
  fopts.upper = {1.5, 10.0, 10.0};
  if (fix_y0) fopts.fixed = {2};
  rec.fit = least_squares_fit(model, xs, ys, q0, fopts);

  rec.p = rec.fit.params(0);
  rec.a = rec.fit.params(1);
  rec.y0 = rec.fit.params(2);
  rec.p_out_of_range = !(rec.p > 0.0 && rec.p <= 1.0 + 1e-12);
  rec.pepg = 1.0 - rec.p;
  double dim = n_qubits == 1 ? 2.0 : 4.0;
  rec.epc = (dim - 1.0) / dim * (1.0 - rec.p);
  return rec;
}

double coherence_limit(double t_gate_us, double t2_1_us, double t2_2_us) {
  if (t_gate_us < 0.0) throw std::invalid_argument("negative gate time");
  if (t2_1_us <= 0.0 || t2_2_us <= 0.0)
    throw std::invalid_argument("coherence times must be positive");
  double t2_mean = 0.5 * (t2_1_us + t2_2_us);
  if (std::isinf(t2_mean)) return 0.0;
  return 1.0 - std::exp(-t_gate_us / t2_mean);
}

double compose_epc(double epg_2q, double epg_1q, double gpc_2q,
                   double gpc_1q) {
  return 1.0 -
         std::pow(1.0 - epg_2q, gpc_2q) * std::pow(1.0 - epg_1q, gpc_1q);
}

double epg1q_from_epc1q(double epc_1q, double gpc_1q) {
  if (epc_1q < 0.0 || epc_1q >= 1.0 || gpc_1q <= 0.0)
    throw std::invalid_argument("invalid per-Clifford error or gate count");
  return 1.0 - std::pow(1.0 - epc_1q, 1.0 / gpc_1q);
}

double extract_epg2q(double epc, double epc_1q, double gpc_2q) {
  if (epc < 0.0 || epc >= 1.0 || epc_1q < 0.0 || epc_1q >= 1.0 ||
      gpc_2q <= 0.0)
    throw std::invalid_argument("error fractions must lie in [0, 1)");
  double ratio = (1.0 - epc) / (1.0 - epc_1q);
  if (ratio > 1.0 + 1e-12)
    throw std::invalid_argument(
        "single-qubit errors alone exceed the total error per Clifford");
  return std::max(0.0, 1.0 - std::pow(std::min(ratio, 1.0), 1.0 / gpc_2q));
}

Eigen::Vector2cd qubit_state_vector(QubitState s) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (s) {
    case QubitState::zero: return {1.0, 0.0};
    case QubitState::one: return {0.0, 1.0};
    case QubitState::minus_i: return {r, cxd(0.0, -r)};
    case QubitState::plus_i: return {r, cxd(0.0, r)};
    case QubitState::minus: return {r, -r};
    case QubitState::plus: return {r, r};
  }
  throw std::invalid_argument("unknown qubit state");
}

std::vector<NativeGate> prep_pulses(QubitState s, int qubit) {
  if (qubit != 1 && qubit != 2) throw std::invalid_argument("qubit is 1 or 2");
  NativeGate g;
  g.qubit = qubit;
  switch (s) {
    case QubitState::zero: return {};
    case QubitState::one:
      g.kind = PulseKind::pi;
      g.phase = PulsePhase::x;
      break;
    case QubitState::minus_i:
      g.kind = PulseKind::pi_half;
      g.phase = PulsePhase::x;
      break;
    case QubitState::plus_i:
      g.kind = PulseKind::pi_half;
      g.phase = PulsePhase::minus_x;
      break;
    case QubitState::minus:
      g.kind = PulseKind::pi_half;
      g.phase = PulsePhase::y;
      break;
    case QubitState::plus:
      g.kind = PulseKind::pi_half;
      g.phase = PulsePhase::minus_y;
      break;
  }
  return {g};
}

EntanglerTiming default_timing(double nu_dip_mhz, int n_pi, double rabi_mhz,
                               Envelope envelope) {
  if (nu_dip_mhz <= 0.0 || n_pi < 1 || rabi_mhz <= 0.0)
    throw std::invalid_argument("timing needs positive coupling and drive");
  EntanglerTiming t;
  t.n_pi = n_pi;
  double tau2 = 1e3 / (4.0 * n_pi * nu_dip_mhz);
  double w = envelope == Envelope::instantaneous
                 ? 0.0
                 : pulse_duration_ns(PulseKind::pi, rabi_mhz);
  t.tau1_ns = 2.0 * (tau2 + w + 5.0);
  t.tau2_ns = tau2;
  return t;
}

Sequence word_to_sequence(const std::vector<NativeGate>& word,
                          const EntanglerTiming& timing, double rabi_mhz,
                          Envelope envelope) {
  Sequence seq;
  for (const NativeGate& g : word) {
    if (g.entangling) {
      seq.append(build_sqrt_zz(timing.tau1_ns, timing.tau2_ns, timing.n_pi,
                               rabi_mhz, envelope));
    } else {
      PulseTarget t = g.qubit == 1 ? PulseTarget::nv1 : PulseTarget::nv2;
      seq.add_pulse(make_pulse(t, g.kind, g.phase, rabi_mhz, envelope));
    }
  }
  return seq;
}

namespace {

int gate_slot(const NativeGate& g) {
  if (g.entangling) return 16;
  return (g.qubit - 1) * 8 + static_cast<int>(g.kind) * 4 +
         static_cast<int>(g.phase);
}

// cached tableaux of the native gates as two-qubit elements
const CliffordElement& native_gate_element(const NativeGate& g) {
  static const std::vector<CliffordElement> table = [] {
    std::vector<CliffordElement> t(17);
    for (int q = 1; q <= 2; ++q)
      for (int k = 0; k < 2; ++k)
        for (int ph = 0; ph < 4; ++ph) {
          NativeGate ng;
          ng.qubit = q;
          ng.kind = static_cast<PulseKind>(k);
          ng.phase = static_cast<PulsePhase>(ph);
          t[static_cast<size_t>(gate_slot(ng))] =
              tableau_from_unitary(native_gate_unitary(ng, 2));
        }
    NativeGate ent;
    ent.entangling = true;
    ent.qubit = 0;
    t[16] = tableau_from_unitary(sqrt_zz_unitary());
    return t;
  }();
  return table[static_cast<size_t>(gate_slot(g))];
}

const CliffordElement& native_gate_element_1q(const NativeGate& g) {
  static const std::vector<CliffordElement> table = [] {
    std::vector<CliffordElement> t(8);
    for (int k = 0; k < 2; ++k)
      for (int ph = 0; ph < 4; ++ph) {
        NativeGate ng;
        ng.qubit = 1;
        ng.kind = static_cast<PulseKind>(k);
        ng.phase = static_cast<PulsePhase>(ph);
        t[static_cast<size_t>(k * 4 + ph)] =
            tableau_from_unitary(native_gate_unitary(ng, 1));
      }
    return t;
  }();
  return table[static_cast<size_t>(static_cast<int>(g.kind) * 4 +
                                   static_cast<int>(g.phase))];
}

CliffordElement word_element(const std::vector<NativeGate>& word) {
  CliffordElement acc = identity_clifford(2);
  for (const NativeGate& g : word) acc = compose(native_gate_element(g), acc);
  return acc;
}

// z of the electron pair without the alternating flip: leakage out of the
// qubit levels counts as error
double z_from_columns(const PairModel& m, const Mat& cols) {
  Mat rho9 = electron_density_from_columns(cols);
  int l01 = m.qubit_levels[0][0], l02 = m.qubit_levels[1][0];
  double p1 = 0.0, p2 = 0.0;
  for (int b = 0; b < 3; ++b) p1 += rho9(3 * l01 + b, 3 * l01 + b).real();
  for (int a = 0; a < 3; ++a) p2 += rho9(3 * a + l02, 3 * a + l02).real();
  return p1 + p2 - 1.0;
}

double z_single_from_columns(const PairModel& m, const Mat& cols, int nv) {
  Mat rho9 = electron_density_from_columns(cols);
  int l0 = m.qubit_levels[static_cast<size_t>(nv)][0];
  double p = 0.0;
  for (int k = 0; k < 3; ++k) {
    int idx = nv == 0 ? 3 * l0 + k : 3 * k + l0;
    p += rho9(idx, idx).real();
  }
  return 2.0 * p - 1.0;
}

double mean_expectation(const Mat& op, const Mat& cols) {
  double v = 0.0;
  for (long c = 0; c < cols.cols(); ++c)
    v += (cols.col(c).adjoint() * op * cols.col(c))(0, 0).real();
  return v / static_cast<double>(cols.cols());
}

PairModel hyperfine_off(const PairModel& m) {
  NvParameters a = m.nv1, b = m.nv2;
  a.a_diag = {0.0, 0.0, 0.0};
  b.a_diag = {0.0, 0.0, 0.0};
  return build_pair_model(a, b, m.geometry, m.nu_dip, m.qubit_basis);
}

std::vector<NativeGate> strip_entanglers(const std::vector<NativeGate>& word) {
  std::vector<NativeGate> out;
  for (const NativeGate& g : word)
    if (!g.entangling) out.push_back(g);
  return out;
}

}  // namespace

RepetitiveResult repetitive_benchmark(const PairModel& model, QubitState nv1,
                                      QubitState nv2,
                                      const std::vector<int>& n_list,
                                      const RepetitiveOptions& opts) {
  opts.charge.validate();
  if (n_list.empty()) throw std::invalid_argument("empty gate count list");
  for (int n : n_list)
    if (n < 0) throw std::invalid_argument("negative gate count");

  std::vector<NativeGate> prep = prep_pulses(nv1, 1);
  for (const NativeGate& g : prep_pulses(nv2, 2)) prep.push_back(g);
  CliffordElement prep_el = word_element(prep);
  const CliffordElement& gate_el = native_gate_element([] {
    NativeGate g;
    g.entangling = true;
    g.qubit = 0;
    return g;
  }());

  // the entangler's tableau powers cycle with period 4 exactly
  std::array<CliffordElement, 4> gate_pow;
  gate_pow[0] = identity_clifford(2);
  for (int k = 1; k < 4; ++k) gate_pow[k] = compose(gate_el, gate_pow[k - 1]);

  size_t npts = n_list.size();
  std::vector<std::vector<NativeGate>> rev_words(npts);
  for (size_t i = 0; i < npts; ++i) {
    if (!opts.reverse) continue;
    CliffordElement fwd = compose(gate_pow[static_cast<size_t>(
                                      ((n_list[i] % 4) + 4) % 4)],
                                  prep_el);
    rev_words[i] = decompose_clifford(inverse_element(fwd));
  }

  double nv0 = opts.charge.nv0_level;
  EntanglerTiming timing = opts.timing;
  if (opts.physical && timing.tau1_ns <= 0.0)
    timing = default_timing(model.nu_dip, 8, opts.rabi_mhz, opts.envelope);
  bool decohere = opts.t2_us[0] > 0.0 && opts.t2_us[1] > 0.0;
  double t_gate_us = timing.t_gate_us();
  if (decohere && t_gate_us <= 0.0)
    throw std::invalid_argument("decoherence needs a gate duration");

  RepetitiveResult res;
  for (auto& s : res.sector) s.resize(npts);

  if (!opts.physical) {
    Mat u_prep = native_word_unitary(prep, 2);
    Mat gate = sqrt_zz_unitary();
    Vec start = Vec::Zero(4);
    start(0) = 1.0;
    for (size_t i = 0; i < npts; ++i) {
      int n = n_list[i];
      Vec full = u_prep * start;
      for (int k = 0; k < ((n % 4) + 4) % 4; ++k) full = gate * full;
      full = native_word_unitary(rev_words[i], 2) * full;
      Vec loc = native_word_unitary(strip_entanglers(rev_words[i]), 2) *
                (u_prep * start);
      double s_full = std::norm(full(0));
      double p0_nv1 = std::norm(loc(0)) + std::norm(loc(1));
      double p0_nv2 = std::norm(loc(0)) + std::norm(loc(2));
      res.sector[0][i] = s_full;
      res.sector[1][i] = p0_nv1 * nv0;
      res.sector[2][i] = nv0 * p0_nv2;
      res.sector[3][i] = nv0 * nv0;
    }
  } else {
    Propagator prop(model, opts.prop);
    PairModel g0 = with_coupling(model, 0.0);
    Propagator prop_g0(g0, opts.prop);
    Mat cols0 = initial_columns(model);
    Sequence prep_seq = word_to_sequence(prep, timing, opts.rabi_mhz,
                                         opts.envelope);
    Sequence gate_seq = build_sqrt_zz(timing.tau1_ns, timing.tau2_ns,
                                      timing.n_pi, opts.rabi_mhz,
                                      opts.envelope);
    Mat p00 = model.qubit_projectors[0];
    Mat p0_nv1 = model.qubit_projectors[0] + model.qubit_projectors[1];
    Mat p0_nv2 = model.qubit_projectors[0] + model.qubit_projectors[2];

    struct Point {
      double s_full, p1, p2;
    };
    std::vector<Point> pts = parallel_map<Point>(
        static_cast<long>(npts), [&](long i) {
          Sequence seq = prep_seq;
          for (int k = 0; k < n_list[static_cast<size_t>(i)]; ++k)
            seq.append(gate_seq);
          seq.append(word_to_sequence(rev_words[static_cast<size_t>(i)],
                                      timing, opts.rabi_mhz, opts.envelope));
          Mat out_full = prop.run_columns(seq, cols0);
          Mat out_g0 = prop_g0.run_columns(seq, cols0);
          return Point{mean_expectation(p00, out_full),
                       mean_expectation(p0_nv1, out_g0),
                       mean_expectation(p0_nv2, out_g0)};
        });
    for (size_t i = 0; i < npts; ++i) {
      res.sector[0][i] = pts[i].s_full;
      res.sector[1][i] = pts[i].p1 * nv0;
      res.sector[2][i] = nv0 * pts[i].p2;
      res.sector[3][i] = nv0 * nv0;
    }
  }

  if (decohere) {
    for (size_t i = 0; i < npts; ++i) {
      double t_us = n_list[i] * t_gate_us;
      double f_pair =
          std::exp(-t_us / (0.5 * (opts.t2_us[0] + opts.t2_us[1])));
      res.sector[0][i] = 0.25 + (res.sector[0][i] - 0.25) * f_pair;
      if (nv0 > 0.0) {
        double f1 = std::exp(-t_us / opts.t2_us[0]);
        double f2 = std::exp(-t_us / opts.t2_us[1]);
        res.sector[1][i] = (0.5 + (res.sector[1][i] / nv0 - 0.5) * f1) * nv0;
        res.sector[2][i] = (0.5 + (res.sector[2][i] / nv0 - 0.5) * f2) * nv0;
      }
    }
  }

  std::vector<double> xs(npts), total(npts);
  for (size_t i = 0; i < npts; ++i) {
    xs[i] = n_list[i];
    total[i] = charge_mixture_signal({res.sector[0][i], res.sector[1][i],
                                      res.sector[2][i], res.sector[3][i]},
                                     opts.charge);
  }
  res.decay = fit_decay(xs, total, opts.fix_y0, 2);

  double sum0 = 0.0, sum2 = 0.0;
  long c0 = 0, c2 = 0;
  for (size_t i = 0; i < npts; ++i) {
    int m = ((n_list[i] % 4) + 4) % 4;
    if (m == 0) {
      sum0 += total[i];
      ++c0;
      for (int s = 1; s < 4; ++s)
        res.mod0_spread = std::max(
            res.mod0_spread, std::abs(res.sector[static_cast<size_t>(s)][i] -
                                      res.sector[0][i]));
    } else if (m == 2) {
      sum2 += total[i];
      ++c2;
    }
  }
  if (c0 > 0 && c2 > 0) res.mod4_depth = sum0 / c0 - sum2 / c2;
  return res;
}

namespace {

struct RbJobOut {
  double z = 0.0;
  long n_1q = 0;
  long n_2q = 0;
  long n_cliffords = 0;
};

// sampled Clifford words for one job plus the appended inverse
std::vector<std::vector<NativeGate>> rb_words(int n, std::mt19937_64& rng) {
  std::vector<std::vector<NativeGate>> words;
  words.reserve(static_cast<size_t>(n) + 1);
  CliffordElement acc = identity_clifford(2);
  for (int k = 0; k < n; ++k) {
    CliffordElement c = sample_clifford(2, rng);
    acc = compose(c, acc);
    words.push_back(decompose_clifford(c));
  }
  words.push_back(decompose_clifford(inverse_element(acc)));
  return words;
}

void count_gates(const std::vector<std::vector<NativeGate>>& words,
                 RbJobOut& out) {
  for (const auto& w : words) {
    ++out.n_cliffords;
    for (const NativeGate& g : w)
      if (g.entangling)
        ++out.n_2q;
      else
        ++out.n_1q;
  }
}

double ideal_survival(const std::vector<Mat>& unitaries, double depolarizing) {
  Mat rho = Mat::Zero(4, 4);
  rho(0, 0) = 1.0;
  Mat eye = ident(4);
  for (const Mat& u : unitaries) {
    rho = u * rho * u.adjoint();
    if (depolarizing > 0.0)
      rho = (1.0 - depolarizing) * rho + depolarizing * 0.25 * eye;
  }
  // z weights diag(1, 0, 0, -1) in the (00, 01, 10, 11) order
  return rho(0, 0).real() - rho(3, 3).real();
}

}  // namespace

RbResult run_randomized_benchmarking(const PairModel& model,
                                     const std::vector<int>& n_cliff,
                                     const RbOptions& opts) {
  if (n_cliff.empty()) throw std::invalid_argument("empty length list");
  for (int n : n_cliff)
    if (n < 1) throw std::invalid_argument("lengths must be >= 1");
  if (opts.n_random < 1)
    throw std::invalid_argument("need at least one randomization");
  if (opts.depolarizing < 0.0 || opts.depolarizing >= 1.0)
    throw std::invalid_argument("depolarizing strength outside [0, 1)");

  EntanglerTiming timing = opts.timing;
  if (!opts.ideal && timing.tau1_ns <= 0.0)
    timing = default_timing(model.nu_dip, 8, opts.rabi_mhz, opts.envelope);

  PairModel sim_model =
      opts.toggles.hyperfine ? model : hyperfine_off(model);
  PropagationOptions popts;
  popts.step_density = opts.step_density;
  popts.drive.crosstalk = opts.toggles.crosstalk;

  std::unique_ptr<Propagator> prop;
  Mat cols0;
  if (!opts.ideal) {
    prop = std::make_unique<Propagator>(sim_model, popts);
    cols0 = initial_columns(sim_model, opts.toggles.polarized_nuclear);
  }
  bool decohere = opts.t2_us[0] > 0.0 && opts.t2_us[1] > 0.0;

  long jobs = static_cast<long>(n_cliff.size()) * opts.n_random;
  auto run_job = [&](long j, double density) {
    RbJobOut out;
    auto rng = job_rng(opts.seed, static_cast<uint64_t>(j));
    int n = n_cliff[static_cast<size_t>(j) / opts.n_random];
    auto words = rb_words(n, rng);
    count_gates(words, out);
    if (opts.ideal) {
      std::vector<Mat> us;
      us.reserve(words.size());
      for (const auto& w : words) us.push_back(native_word_unitary(w, 2));
      out.z = ideal_survival(us, opts.depolarizing);
    } else {
      Sequence seq;
      for (const auto& w : words)
        seq.append(word_to_sequence(w, timing, opts.rabi_mhz, opts.envelope));
      const Propagator* pr = prop.get();
      std::unique_ptr<Propagator> alt;
      if (density > 0.0 && density != popts.step_density) {
        PropagationOptions po = popts;
        po.step_density = density;
        alt = std::make_unique<Propagator>(sim_model, po);
        pr = alt.get();
      }
      out.z = z_from_columns(sim_model, pr->run_columns(seq, cols0));
      if (decohere)
        out.z *= coherence_decay(1e-3 * seq.total_duration(), opts.t2_us);
    }
    return out;
  };

  std::vector<RbJobOut> results =
      parallel_map<RbJobOut>(jobs, [&](long j) { return run_job(j, 0.0); });

  RbResult res;
  std::vector<double> xs(n_cliff.begin(), n_cliff.end());
  std::vector<double> ys(n_cliff.size(), 0.0);
  long n1 = 0, n2 = 0, nc = 0;
  for (long j = 0; j < jobs; ++j) {
    ys[static_cast<size_t>(j) / opts.n_random] +=
        results[static_cast<size_t>(j)].z / opts.n_random;
    n1 += results[static_cast<size_t>(j)].n_1q;
    n2 += results[static_cast<size_t>(j)].n_2q;
    nc += results[static_cast<size_t>(j)].n_cliffords;
  }
  res.gpc.samples = nc;
  res.gpc.gpc_1q = nc > 0 ? static_cast<double>(n1) / nc : 0.0;
  res.gpc.gpc_2q = nc > 0 ? static_cast<double>(n2) / nc : 0.0;

  res.convergence.step_density = opts.step_density;
  res.convergence.reference_density = 20.0;
  if (!opts.ideal && opts.convergence_check) {
    double z_ref = run_job(0, 20.0).z;
    res.convergence.delta = std::abs(results[0].z - z_ref);
    res.convergence.checked = true;
  }

  res.decay = fit_decay(xs, ys, opts.fix_y0, 2);
  return res;
}

OneQubitResult single_qubit_epc(const PairModel& model, OneQubitMode mode,
                                const std::vector<int>& n_cliff,
                                const RbOptions& opts) {
  if (n_cliff.empty()) throw std::invalid_argument("empty length list");
  for (int n : n_cliff)
    if (n < 1) throw std::invalid_argument("lengths must be >= 1");
  if (opts.n_random < 1)
    throw std::invalid_argument("need at least one randomization");

  EntanglerTiming timing = opts.timing;
  if (!opts.ideal && timing.tau1_ns <= 0.0)
    timing = default_timing(model.nu_dip, 8, opts.rabi_mhz, opts.envelope);

  PairModel sim_model =
      opts.toggles.hyperfine ? model : hyperfine_off(model);
  PropagationOptions popts;
  popts.step_density = opts.step_density;
  popts.drive.crosstalk = opts.toggles.crosstalk;
  std::unique_ptr<Propagator> prop;
  Mat cols0;
  if (!opts.ideal) {
    prop = std::make_unique<Propagator>(sim_model, popts);
    cols0 = initial_columns(sim_model, opts.toggles.polarized_nuclear);
  }

  bool stripped = mode == OneQubitMode::stripped;
  int bare_nv = mode == OneQubitMode::bare_nv2 ? 1 : 0;

  long jobs = static_cast<long>(n_cliff.size()) * opts.n_random;
  std::vector<RbJobOut> results = parallel_map<RbJobOut>(jobs, [&](long j) {
    RbJobOut out;
    auto rng = job_rng(opts.seed, static_cast<uint64_t>(j));
    int n = n_cliff[static_cast<size_t>(j) / opts.n_random];

    // flat_local keeps qubit 1 labels for the exact-unitary path; flat is
    // the word actually played, with bare words retargeted to their NV
    std::vector<NativeGate> flat_local, flat;
    if (stripped) {
      CliffordElement local = identity_clifford(2);
      for (int k = 0; k < n; ++k) {
        auto word = strip_entanglers(
            decompose_clifford(sample_clifford(2, rng)));
        for (const NativeGate& g : word) {
          local = compose(native_gate_element(g), local);
          flat.push_back(g);
        }
      }
      auto corr = decompose_clifford(inverse_element(local));
      for (const NativeGate& g : corr) flat.push_back(g);
      flat_local = flat;
      out.n_cliffords = n + 1;
    } else {
      CliffordElement acc = identity_clifford(1);
      for (int k = 0; k < n; ++k) {
        CliffordElement c = sample_clifford(1, rng);
        acc = compose(c, acc);
        for (const NativeGate& g : decompose_clifford(c))
          flat_local.push_back(g);
      }
      for (const NativeGate& g : decompose_clifford(inverse_element(acc)))
        flat_local.push_back(g);
      flat = flat_local;
      for (NativeGate& g : flat) g.qubit = bare_nv + 1;
      out.n_cliffords = n + 1;
    }
    out.n_1q = static_cast<long>(flat.size());

    if (opts.ideal) {
      if (stripped) {
        Vec psi = Vec::Zero(4);
        psi(0) = 1.0;
        psi = native_word_unitary(flat_local, 2) * psi;
        double p1 = std::norm(psi(0)) + std::norm(psi(1));
        double p2 = std::norm(psi(0)) + std::norm(psi(2));
        out.z = p1 + p2 - 1.0;
      } else {
        Vec psi = Vec::Zero(2);
        psi(0) = 1.0;
        psi = native_word_unitary(flat_local, 1) * psi;
        out.z = 2.0 * std::norm(psi(0)) - 1.0;
      }
    } else {
      Sequence seq =
          word_to_sequence(flat, timing, opts.rabi_mhz, opts.envelope);
      Mat cols = prop->run_columns(seq, cols0);
      out.z = stripped ? z_from_columns(sim_model, cols)
                       : z_single_from_columns(sim_model, cols, bare_nv);
      if (opts.t2_us[0] > 0.0 && opts.t2_us[1] > 0.0)
        out.z *= coherence_decay(1e-3 * seq.total_duration(), opts.t2_us);
    }
    return out;
  });

  std::vector<double> xs(n_cliff.begin(), n_cliff.end());
  std::vector<double> ys(n_cliff.size(), 0.0);
  long n1 = 0, nc = 0;
  for (long j = 0; j < jobs; ++j) {
    ys[static_cast<size_t>(j) / opts.n_random] +=
        results[static_cast<size_t>(j)].z / opts.n_random;
    n1 += results[static_cast<size_t>(j)].n_1q;
    nc += results[static_cast<size_t>(j)].n_cliffords;
  }

  OneQubitResult res;
  res.gpc.samples = nc;
  res.gpc.gpc_1q = nc > 0 ? static_cast<double>(n1) / nc : 0.0;
  res.gpc.gpc_2q = 0.0;
  res.decay = fit_decay(xs, ys, opts.fix_y0, stripped ? 2 : 1);
  double epc1q = res.decay.epc;
  if (epc1q >= 0.0 && epc1q < 1.0 && res.gpc.gpc_1q > 0.0) {
    res.epg_1q = epg1q_from_epc1q(epc1q, res.gpc.gpc_1q);
    res.f_1q = 1.0 - res.epg_1q;
  }
  return res;
}

QubitChannel entangler_channel(const PairModel& model,
                               const EntanglerTiming& timing,
                               const ChannelOptions& opts) {
  PropagationOptions popts;
  popts.step_density = opts.step_density;
  popts.drive.crosstalk = opts.crosstalk;
  Propagator prop(model, popts);
  Sequence seq = build_sqrt_zz(timing.tau1_ns, timing.tau2_ns, timing.n_pi,
                               opts.rabi_mhz, opts.envelope);

  auto full_index = [&](int a, int na, int b, int nb) {
    return ((a * 3 + na) * 3 + b) * 3 + nb;
  };
  Mat cols = Mat::Zero(81, 36);
  for (int i = 0; i < 4; ++i) {
    int e1 = model.qubit_levels[0][i / 2];
    int e2 = model.qubit_levels[1][i % 2];
    for (int n = 0; n < 9; ++n)
      cols(full_index(e1, n / 3, e2, n % 3), i * 9 + n) = 1.0;
  }
  Mat out = prop.run_columns(seq, cols);

  // 4x9 qubit-subspace amplitude block of each propagated column
  auto block = [&](int i, int n) {
    Mat b(4, 9);
    for (int a = 0; a < 4; ++a) {
      int e1 = model.qubit_levels[0][a / 2];
      int e2 = model.qubit_levels[1][a % 2];
      for (int nu = 0; nu < 9; ++nu)
        b(a, nu) = out(full_index(e1, nu / 3, e2, nu % 3), i * 9 + n);
    }
    return b;
  };

  QubitChannel dmap;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Mat m = Mat::Zero(4, 4);
      for (int n = 0; n < 9; ++n)
        m += block(i, n) * block(j, n).adjoint();
      dmap[static_cast<size_t>(i)][static_cast<size_t>(j)] = m / 9.0;
    }
  return dmap;
}

double average_gate_fidelity(const QubitChannel& dmap, const Mat& target) {
  if (target.rows() != 4 || target.cols() != 4)
    throw std::invalid_argument("target must act on the qubit pair");
  double f = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Mat m1 = target.adjoint() *
               dmap[static_cast<size_t>(i)][static_cast<size_t>(j)] * target;
      Mat m2 = target.adjoint() *
               dmap[static_cast<size_t>(j)][static_cast<size_t>(j)] * target;
      f += m1(i, j).real() + m2(i, i).real();
    }
  return f / 20.0;
}

double fidelity_with_decoherence(double f_coherent, double t_gate_us,
                                 const std::array<double, 2>& t2_us) {
  if (t2_us[0] <= 0.0 || t2_us[1] <= 0.0) return f_coherent;
  double c = coherence_decay(t_gate_us, t2_us);
  return c * f_coherent + (1.0 - c) * 0.25;
}

AblationReport error_ablation(const PairModel& model,
                              const AblationOptions& opts) {
  if (opts.rabi_mhz.empty()) throw std::invalid_argument("empty Rabi sweep");
  if (opts.n_cliff < 1 || opts.n_random < 1)
    throw std::invalid_argument("need positive sequence counts");
  if (opts.spam_a <= 0.0) throw std::invalid_argument("spam scale must be > 0");

  PairModel hf_model = hyperfine_off(model);
  PropagationOptions p_on, p_off;
  p_on.step_density = opts.step_density;
  p_off.step_density = opts.step_density;
  p_off.drive.crosstalk = false;

  Propagator prop_full(model, p_on);
  Propagator prop_ct(model, p_off);
  Propagator prop_hf(hf_model, p_on);
  Propagator prop_all(hf_model, p_off);

  Mat cols_mixed = initial_columns(model);
  Mat cols_pol = initial_columns(model, true);

  // one shared set of random words for every variant and Rabi point
  std::vector<std::vector<std::vector<NativeGate>>> all_words(
      static_cast<size_t>(opts.n_random));
  long n1 = 0, n2 = 0, nc = 0, n_pi_pulses = 0, n_half_pulses = 0;
  for (int r = 0; r < opts.n_random; ++r) {
    auto rng = job_rng(opts.seed, static_cast<uint64_t>(r));
    all_words[static_cast<size_t>(r)] = rb_words(opts.n_cliff, rng);
    RbJobOut cnt;
    count_gates(all_words[static_cast<size_t>(r)], cnt);
    n1 += cnt.n_1q;
    n2 += cnt.n_2q;
    nc += cnt.n_cliffords;
    for (const auto& w : all_words[static_cast<size_t>(r)])
      for (const NativeGate& g : w) {
        if (g.entangling) continue;
        if (g.kind == PulseKind::pi)
          ++n_pi_pulses;
        else
          ++n_half_pulses;
      }
  }

  AblationReport report;
  report.t2_us = opts.t2_us;
  report.gpc.samples = nc;
  report.gpc.gpc_1q = static_cast<double>(n1) / nc;
  report.gpc.gpc_2q = static_cast<double>(n2) / nc;
  double gpc_1q = opts.gpc_1q > 0.0 ? opts.gpc_1q : report.gpc.gpc_1q;
  double gpc_2q = opts.gpc_2q > 0.0 ? opts.gpc_2q : report.gpc.gpc_2q;

  static const std::array<const char*, 5> variants = {
      "full", "polarized", "hyperfine_off", "crosstalk_off", "all_off"};

  for (double rabi : opts.rabi_mhz) {
    EntanglerTiming timing =
        default_timing(model.nu_dip, opts.n_pi, rabi, opts.envelope);

    struct JobZ {
      std::array<double, 5> z;
    };
    std::vector<JobZ> zs = parallel_map<JobZ>(
        opts.n_random, [&](long r) {
          Sequence seq;
          for (const auto& w : all_words[static_cast<size_t>(r)])
            seq.append(word_to_sequence(w, timing, rabi, opts.envelope));
          JobZ out{};
          out.z[0] = z_from_columns(
              model, prop_full.run_columns(seq, cols_mixed));
          out.z[1] = z_from_columns(
              model, prop_full.run_columns(seq, cols_pol));
          out.z[2] = z_from_columns(
              hf_model, prop_hf.run_columns(seq, cols_pol));
          out.z[3] = z_from_columns(
              model, prop_ct.run_columns(seq, cols_mixed));
          out.z[4] = z_from_columns(
              hf_model, prop_all.run_columns(seq, cols_pol));
          return out;
        });

    AblationPoint pt;
    pt.rabi_mhz = rabi;
    std::array<double, 5> zbar{};
    for (const JobZ& jz : zs)
      for (int v = 0; v < 5; ++v)
        zbar[static_cast<size_t>(v)] +=
            jz.z[static_cast<size_t>(v)] / opts.n_random;

    // coherence limit per Clifford at this drive strength
    double t_1q_us = 1e-3 *
                     (n_pi_pulses * pulse_duration_ns(PulseKind::pi, rabi) +
                      n_half_pulses *
                          pulse_duration_ns(PulseKind::pi_half, rabi)) /
                     std::max<long>(n_pi_pulses + n_half_pulses, 1);
    double epg2q_t2 =
        coherence_limit(timing.t_gate_us(), opts.t2_us[0], opts.t2_us[1]);
    double epg1q_t2 = coherence_limit(t_1q_us, opts.t2_us[0], opts.t2_us[1]);
    pt.epc_t2 = compose_epc(epg2q_t2, epg1q_t2, gpc_2q, gpc_1q);

    auto p_of = [&](double z, bool with_t2) {
      double zt = with_t2 ? z * (1.0 - pt.epc_t2) : z;
      double base = (zt - opts.spam_y0) / opts.spam_a;
      if (base <= 0.0) {
        pt.flagged = true;
        return 0.0;
      }
      double p = std::pow(base, 1.0 / opts.n_cliff);
      if (!(p > 0.0 && p <= 1.0 + 1e-12)) pt.flagged = true;
      return p;
    };

    std::array<double, 5> pv{};
    for (int v = 0; v < 5; ++v) {
      pv[static_cast<size_t>(v)] = p_of(zbar[static_cast<size_t>(v)], true);
      pt.z[variants[static_cast<size_t>(v)]] = zbar[static_cast<size_t>(v)];
      pt.p[variants[static_cast<size_t>(v)]] = pv[static_cast<size_t>(v)];
    }
    double p_no_t2 = p_of(zbar[0], false);

    pt.delta_full = 1.0 - pv[0];
    pt.epc = 0.75 * pt.delta_full;
    if (pt.delta_full < 1e-9) {
      pt.flagged = true;
    } else {
      auto cr = [&](double p_er) { return (p_er - pv[0]) / pt.delta_full; };
      double cr_t2 = cr(p_no_t2);
      double cr_pol = cr(pv[1]);
      pt.share["unpolarized_n14"] = cr_pol;
      pt.share["misaligned_field"] = cr(pv[2]) - cr_pol;
      pt.share["crosstalk_leakage"] = cr(pv[3]);
      pt.share["decoherence"] = cr_t2;
      pt.share["residual"] = (1.0 - cr_t2) - cr(pv[4]);
    }
    report.points.push_back(std::move(pt));
  }

  report.convergence.step_density = opts.step_density;
  report.convergence.reference_density = 20.0;
  if (opts.convergence_check && !report.points.empty()) {
    EntanglerTiming timing = default_timing(model.nu_dip, opts.n_pi,
                                            opts.rabi_mhz[0], opts.envelope);
    Sequence seq;
    for (const auto& w : all_words[0])
      seq.append(word_to_sequence(w, timing, opts.rabi_mhz[0], opts.envelope));
    PropagationOptions p_ref = p_on;
    p_ref.step_density = 20.0;
    Propagator prop_ref(model, p_ref);
    double z_ref =
        z_from_columns(model, prop_ref.run_columns(seq, cols_mixed));
    double z_low =
        z_from_columns(model, prop_full.run_columns(seq, cols_mixed));
    report.convergence.delta = std::abs(z_ref - z_low);
    report.convergence.checked = true;
  }
  return report;
}

}  // namespace nvreg
