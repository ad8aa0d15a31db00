#pragma once

#include <array>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "nvreg/hamiltonian.hpp"

namespace nvreg {

enum class PulseTarget { nv1 = 0, nv2 = 1 };
enum class PulseKind { pi, pi_half };
enum class PulsePhase { x, y, minus_x, minus_y };
enum class Envelope { sine, rectangular, instantaneous };

// carrier phase offset in radians implementing the pulse phase
double phase_offset(PulsePhase p);

// pulse area in radians
double pulse_area(PulseKind k);

// duration of a shaped pulse of the given area at a cyclic-MHz Rabi
// frequency: area / Omega_rabi
double pulse_duration_ns(PulseKind kind, double rabi_mhz);

struct PulseSegment {
  PulseTarget target = PulseTarget::nv1;
  PulseKind kind = PulseKind::pi;
  PulsePhase phase = PulsePhase::x;
  Envelope envelope = Envelope::sine;
  double duration = 0.0;  // ns; 0 if instantaneous
  double rabi = 0.0;      // cyclic MHz
};

PulseSegment make_pulse(PulseTarget target, PulseKind kind, PulsePhase phase,
                        double rabi_mhz, Envelope envelope = Envelope::sine);

// ordered, never-overlapping schedule of pulses and free evolutions
struct SequenceItem {
  bool is_pulse = false;
  PulseSegment pulse;
  double free_ns = 0.0;
};

struct Sequence {
  std::vector<SequenceItem> items;

  void add_pulse(const PulseSegment& p);
  void add_free(double ns);
  void append(const Sequence& other);
  double total_duration() const;  // ns
};

// drive envelope amplitude (rad/us) of a sine-shaped pulse at local time t,
// normalized so the integral over the pulse equals `area` exactly
double sine_envelope(double t_ns, double t_pulse_ns, double rabi_mhz,
                     double area_rad);

struct PropagationOptions {
  double step_density = 20.0;  // Riemann samples per ns
  bool midpoint = false;       // sample mid-interval instead of interval start
  bool interpolate = true;     // Chebyshev-interpolated step exponentials
  int interp_nodes = 20;
  double xi1 = 0.0, xi2 = 0.0;  // static carrier phases, radians
  DriveOptions drive;
};

// rotating-frame propagator of the coupled model over a free evolution
// from t0 to t0 + t (ns), carriers in cyclic MHz
Mat propagate_static(const Mat& h_free, double t_ns,
                     const std::array<double, 2>& carriers_mhz,
                     double t0_ns = 0.0);

// Time-ordered rotating-frame propagation of a full schedule. Caches the
// free-evolution eigendecomposition and per-pulse-family interpolants across
// calls, so reuse one instance for sweeps.
class Propagator {
 public:
  Propagator(const PairModel& model, PropagationOptions opts = {});

  // full 81x81 rotating-frame unitary over [t0, t0 + duration]
  Mat run(const Sequence& seq, double t0_ns = 0.0) const;

  // propagate a block of column states (81 x k), cheaper than run for k < 81
  Mat run_columns(const Sequence& seq, const Mat& columns,
                  double t0_ns = 0.0) const;

  const PairModel& model() const { return model_; }
  const PropagationOptions& options() const { return opts_; }

 private:
  struct Family {
    std::vector<Mat> coeffs;  // Chebyshev coefficient matrices
    double cmax = 0.0;
    double tau_us = 0.0;
    Mat eval(double c) const;
  };

  void walk(const Sequence& seq, double t0_ns, Mat& block) const;
  const Family& family_for(PulseTarget target, double cmax,
                           double tau_us) const;
  Mat ideal_pulse(const PulseSegment& p) const;
  void apply_frame(double t_us, bool dagger, Mat& block) const;

  PairModel model_;
  PropagationOptions opts_;
  Mat evecs_;                  // eigenvectors of h_free
  Eigen::VectorXd evals_;      // eigenvalues of h_free, rad/us
  Eigen::VectorXd htrans_;     // diagonal of the frame generator, rad/us
  mutable std::map<std::tuple<int, long long, long long>, Family> families_;
  mutable std::mutex family_mutex_;  // guards family lookup and creation
};

// convenience wrapper: one-shot driven propagation
Mat propagate_driven(const PairModel& model, const Sequence& seq,
                     const PropagationOptions& opts = {});

// 4-dim reduced-model counterpart used by the analytic oracle and fast desk
// runs; the Hamiltonian is already rotating-frame so pulses enter via their
// envelopes alone. deltas and g angular rad/us.
struct ReducedModel {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double g = 0.0;
};

Mat propagate_reduced(const ReducedModel& m, const Sequence& seq,
                      const PropagationOptions& opts = {});

}  // namespace nvreg
