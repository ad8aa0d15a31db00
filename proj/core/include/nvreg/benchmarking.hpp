#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvreg/clifford.hpp"
#include "nvreg/fit.hpp"
#include "nvreg/hamiltonian.hpp"
#include "nvreg/readout.hpp"
#include "nvreg/sequences.hpp"

namespace nvreg {

// survival decay y = y0 + a p^n and the per-gate error figures it implies
struct DecayRecord {
  std::vector<double> xs;
  std::vector<double> ys;
  FitResult fit;  // params (p, a, y0)
  double p = 1.0;
  double a = 1.0;
  double y0 = 0.0;
  double pepg = 0.0;  // 1 - p
  double epc = 0.0;   // (2^n - 1)/2^n (1 - p)
  int n_qubits = 2;
  bool p_out_of_range = false;
};

// constant series resolve to p = 1 analytically instead of fitting
DecayRecord fit_decay(const std::vector<double>& xs,
                      const std::vector<double>& ys,
                      std::optional<double> fix_y0 = std::nullopt,
                      int n_qubits = 2);

// polarization loss over a gate of duration t_gate against the mean
// coherence time of the pair: 1 - exp(-t / ((T2a + T2b)/2))
double coherence_limit(double t_gate_us, double t2_1_us, double t2_2_us);

// error-per-Clifford composition over the native gate set and its inversion
// for the entangling gate; compose/extract round-trip exactly
double compose_epc(double epg_2q, double epg_1q, double gpc_2q, double gpc_1q);
double epg1q_from_epc1q(double epc_1q, double gpc_1q);
double extract_epg2q(double epc, double epc_1q, double gpc_2q);

// single-qubit product states probed in the repetitive benchmark
enum class QubitState { zero, one, minus_i, plus_i, minus, plus };

Eigen::Vector2cd qubit_state_vector(QubitState s);
// native pulses taking |0> to the state (empty for zero)
std::vector<NativeGate> prep_pulses(QubitState s, int qubit);

// timing of the entangling echo train; tau2 is signed (negative shifts the
// second train one period) and the accumulated zz phase is even in its sign
struct EntanglerTiming {
  double tau1_ns = 0.0;
  double tau2_ns = 0.0;
  int n_pi = 8;

  double t_gate_us() const { return 1e-3 * n_pi * tau1_ns; }
};

// tau2 = 1/(4 n_pi nu); tau1 leaves room for the shaped pi pulses
EntanglerTiming default_timing(double nu_dip_mhz, int n_pi, double rabi_mhz,
                               Envelope envelope = Envelope::sine);

// schedule of a native word: single-qubit pulses plus echo-train entanglers
Sequence word_to_sequence(const std::vector<NativeGate>& word,
                          const EntanglerTiming& timing, double rabi_mhz,
                          Envelope envelope);

struct RepetitiveOptions {
  ChargeMixture charge;  // defaults to pure negative on both
  bool reverse = true;
  bool physical = false;  // pulse-level instead of gate-level
  double rabi_mhz = 23.7;
  Envelope envelope = Envelope::instantaneous;
  EntanglerTiming timing;              // physical mode; zero -> from model
  std::array<double, 2> t2_us{0, 0};   // 0 = decoherence-free
  std::optional<double> fix_y0;
  PropagationOptions prop;
};

struct RepetitiveResult {
  DecayRecord decay;                          // fitted on the weighted total
  std::array<std::vector<double>, 4> sector;  // (--, -0, 0-, 00) survivals
  double mod4_depth = 0.0;    // mean total at n%4==0 minus at n%4==2
  double mod0_spread = 0.0;   // max sector disagreement at n%4==0
};

RepetitiveResult repetitive_benchmark(const PairModel& model, QubitState nv1,
                                      QubitState nv2,
                                      const std::vector<int>& n_list,
                                      const RepetitiveOptions& opts = {});

struct RbToggles {
  bool crosstalk = true;          // false: drive confined to the qubit block
  bool polarized_nuclear = false; // true: start from mI = 0 on both
  bool hyperfine = true;          // false: rebuild the model with A = 0
};

struct ConvergenceNote {
  double step_density = 0.0;
  double reference_density = 0.0;
  double delta = 0.0;  // |z(density) - z(reference)| on one probe sequence
  bool checked = false;
};

struct RbOptions {
  int n_random = 8;
  uint64_t seed = 1;
  bool ideal = false;          // gate-matrix level, no pulses
  double depolarizing = 0.0;   // ideal mode: channel strength per Clifford
  double rabi_mhz = 23.7;
  Envelope envelope = Envelope::sine;
  // 4/ns is the lowest density whose explicit carriers do not alias the
  // counter-rotating line into the band; checked against 20/ns on request
  double step_density = 4.0;
  bool convergence_check = false;  // physical: probe one point at 20/ns
  std::optional<double> fix_y0 = 0.0;
  RbToggles toggles;
  EntanglerTiming timing;             // zero -> from model
  std::array<double, 2> t2_us{0, 0};  // multiplicative survival decay
};

struct RbResult {
  DecayRecord decay;
  GpcStats gpc;  // over the sampled Cliffords including inverses
  ConvergenceNote convergence;
};

// z = ((2 P0_nv1 - 1) + (2 P0_nv2 - 1))/2 without the alternating flip, so
// leakage out of the qubit levels registers as error
RbResult run_randomized_benchmarking(const PairModel& model,
                                     const std::vector<int>& n_cliff,
                                     const RbOptions& opts = {});

enum class OneQubitMode { bare_nv1, bare_nv2, stripped };

struct OneQubitResult {
  DecayRecord decay;
  GpcStats gpc;
  double epg_1q = 0.0;
  double f_1q = 1.0;
};

// bare: per-NV single-qubit benchmarking; stripped: two-qubit circuits with
// the entanglers removed and a local correction appended
OneQubitResult single_qubit_epc(const PairModel& model, OneQubitMode mode,
                                const std::vector<int>& n_cliff,
                                const RbOptions& opts = {});

// qubit-pair channel D(rho) = Tr_n(U rho U^dag) of the entangling train,
// as images of the 16 basis elements |i><j|
using QubitChannel = std::array<std::array<Mat, 4>, 4>;

struct ChannelOptions {
  double rabi_mhz = 23.7;
  Envelope envelope = Envelope::sine;
  double step_density = 4.0;
  bool crosstalk = true;
};

QubitChannel entangler_channel(const PairModel& model,
                               const EntanglerTiming& timing,
                               const ChannelOptions& opts = {});

// average over pure states of <psi|T^dag D(|psi><psi|) T|psi>, evaluated as
// the exact double sum over the computational basis
double average_gate_fidelity(const QubitChannel& dmap, const Mat& target);

// fidelity after an additional depolarizing factor exp(-t (1/T2a + 1/T2b)/2)
double fidelity_with_decoherence(double f_coherent, double t_gate_us,
                                 const std::array<double, 2>& t2_us);

struct AblationOptions {
  std::vector<double> rabi_mhz{6.0, 12.0, 23.7, 40.0};
  int n_cliff = 2;
  int n_random = 8;
  uint64_t seed = 2;
  double spam_a = 1.0;   // Eq-12-style conversion, supplied not fitted
  double spam_y0 = 0.0;
  std::array<double, 2> t2_us{454.0, 476.0};
  int n_pi = 8;
  double step_density = 4.0;
  Envelope envelope = Envelope::sine;
  bool convergence_check = false;
  double gpc_1q = 0.0;  // 0 -> measured from the sampled words
  double gpc_2q = 0.0;
};

struct AblationPoint {
  double rabi_mhz = 0.0;
  double epc_t2 = 0.0;  // coherence limit per Clifford at this Rabi
  std::map<std::string, double> z;      // variant -> simulated z
  std::map<std::string, double> p;      // variant -> decay parameter
  double delta_full = 0.0;              // 1 - p(full)
  double epc = 0.0;                     // (3/4) delta_full
  std::map<std::string, double> share;  // error source -> relative c_r
  bool flagged = false;                 // some p left (0, 1]
};

struct AblationReport {
  std::vector<AblationPoint> points;
  GpcStats gpc;
  ConvergenceNote convergence;
  std::array<double, 2> t2_us{0, 0};
};

// variants: full, polarized, hyperfine_off, crosstalk_off, all_off;
// shares: unpolarized_n14, misaligned_field, crosstalk_leakage,
// decoherence, residual
AblationReport error_ablation(const PairModel& model,
                              const AblationOptions& opts = {});

}  // namespace nvreg
