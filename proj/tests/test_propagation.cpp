#include <cmath>
#include <complex>

#include "doctest.h"
#include "models.hpp"
#include "nvreg/algebra.hpp"
#include "nvreg/propagation.hpp"

using namespace nvreg;

namespace {

// flat index of |e1, n1, e2, n2> in label order (+1, 0, -1 per slot)
int idx(int e1, int n1, int e2, int n2) {
  return ((e1 * 3 + n1) * 3 + e2) * 3 + n2;
}

const int ground = idx(1, 1, 1, 1);

double sigma_y_nv1(const Mat& col, const PairModel& m) {
  cxd c0 = col(idx(m.qubit_levels[0][0], 1, 1, 1), 0);
  cxd c1 = col(idx(m.qubit_levels[0][1], 1, 1, 1), 0);
  return 2.0 * std::imag(std::conj(c0) * c1);
}

}  // namespace

TEST_CASE("pulse bookkeeping") {
  CHECK(pulse_area(PulseKind::pi) == doctest::Approx(pi));
  CHECK(pulse_area(PulseKind::pi_half) == doctest::Approx(pi / 2));
  CHECK(pulse_duration_ns(PulseKind::pi, 23.7) ==
        doctest::Approx(500.0 / 23.7));
  CHECK(pulse_duration_ns(PulseKind::pi_half, 20.0) ==
        doctest::Approx(12.5));

  // shaped envelope integrates to the pulse area
  double t_pulse = pulse_duration_ns(PulseKind::pi, 23.7);
  int n = 20000;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    double t = t_pulse * i / n;
    double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * sine_envelope(t, t_pulse, 23.7, pi);
  }
  acc *= t_pulse / n / 1000.0;  // ns grid, rad/us integrand
  CHECK(std::abs(acc - pi) < 1e-7);
}

TEST_CASE("free evolution composes and matches the schedule walker") {
  PairModel m = setting2_model();
  Mat u_ab = propagate_static(m.h_free, 214.4, m.carriers, 0.0);
  Mat u_a = propagate_static(m.h_free, 137.3, m.carriers, 0.0);
  Mat u_b = propagate_static(m.h_free, 77.1, m.carriers, 137.3);
  CHECK(frobenius_distance(u_ab, u_b * u_a) < 1e-10);
  CHECK(is_unitary(u_ab, 1e-10));

  Sequence fr;
  fr.add_free(214.4);
  Propagator prop(m);
  CHECK(frobenius_distance(prop.run(fr), u_ab) < 1e-10);
}

TEST_CASE("instantaneous pulses act as ideal qubit rotations") {
  PairModel m = setting2_model();
  Propagator prop(m);

  Sequence p1;
  p1.add_pulse(make_pulse(PulseTarget::nv1, PulseKind::pi, PulsePhase::x, 20.0,
                          Envelope::instantaneous));
  Mat u1 = prop.run(p1);
  CHECK(std::abs(std::abs(u1(idx(2, 1, 1, 1), ground)) - 1.0) < 1e-12);
  CHECK(std::abs(u1(ground, ground)) < 1e-12);

  Sequence p2;
  p2.add_pulse(make_pulse(PulseTarget::nv2, PulseKind::pi, PulsePhase::x, 20.0,
                          Envelope::instantaneous));
  Mat u2 = prop.run(p2);
  CHECK(std::abs(std::abs(u2(idx(1, 1, 0, 1), ground)) - 1.0) < 1e-12);

  // two half rotations equal one full rotation
  Sequence hh;
  hh.add_pulse(make_pulse(PulseTarget::nv1, PulseKind::pi_half, PulsePhase::y,
                          20.0, Envelope::instantaneous));
  hh.add_pulse(make_pulse(PulseTarget::nv1, PulseKind::pi_half, PulsePhase::y,
                          20.0, Envelope::instantaneous));
  Sequence full;
  full.add_pulse(make_pulse(PulseTarget::nv1, PulseKind::pi, PulsePhase::y,
                            20.0, Envelope::instantaneous));
  CHECK(process_fidelity(prop.run(hh), prop.run(full)) > 1.0 - 1e-12);
}

TEST_CASE("half rotation about x points the qubit along -y") {
  PairModel m = setting2_model();
  Mat col = Mat::Zero(81, 1);
  col(ground, 0) = 1.0;

  Propagator prop(m);
  Sequence ideal;
  ideal.add_pulse(make_pulse(PulseTarget::nv1, PulseKind::pi_half,
                             PulsePhase::x, 20.0, Envelope::instantaneous));
  CHECK(sigma_y_nv1(prop.run_columns(ideal, col), m) < -0.999999);

  // the timed, shaped pulse lands on the same axis
  Sequence shaped;
  shaped.add_pulse(
      make_pulse(PulseTarget::nv1, PulseKind::pi_half, PulsePhase::x, 20.0));
  CHECK(sigma_y_nv1(prop.run_columns(shaped, col), m) < -0.99);
}

TEST_CASE("driven propagation is unitary and interpolation is transparent") {
  PairModel m = setting2_model();
  Sequence seq;
  seq.add_pulse(
      make_pulse(PulseTarget::nv1, PulseKind::pi_half, PulsePhase::x, 20.0));
  seq.add_free(52.0);
  seq.add_pulse(make_pulse(PulseTarget::nv2, PulseKind::pi, PulsePhase::y,
                           25.0, Envelope::rectangular));
  seq.add_free(31.5);

  PropagationOptions direct;
  direct.step_density = 6.0;
  direct.interpolate = false;
  PropagationOptions fitted = direct;
  fitted.interpolate = true;

  Mat u_direct = Propagator(m, direct).run(seq);
  Mat u_fitted = Propagator(m, fitted).run(seq);
  CHECK(is_unitary(u_direct, 1e-9));
  CHECK(is_unitary(u_fitted, 1e-9));
  CHECK(frobenius_distance(u_direct, u_fitted) < 1e-8);
}

TEST_CASE("sampling error shrinks at first order in the step size") {
  PairModel m = setting2_model();
  Sequence seq;
  seq.add_pulse(
      make_pulse(PulseTarget::nv1, PulseKind::pi, PulsePhase::x, 23.7));

  Mat cols = Mat::Zero(81, 3);
  cols(ground, 0) = 1.0;
  cols(idx(2, 1, 1, 1), 1) = 1.0;
  cols(idx(1, 1, 0, 1), 2) = 1.0;

  auto run_at = [&](double density, bool midpoint) {
    PropagationOptions o;
    o.step_density = density;
    o.midpoint = midpoint;
    return Propagator(m, o).run_columns(seq, cols);
  };
  Mat ref = run_at(256.0, false);
  double e8 = (run_at(8.0, false) - ref).norm();
  double e16 = (run_at(16.0, false) - ref).norm();
  double e32 = (run_at(32.0, false) - ref).norm();
  CHECK(e16 < e8);
  CHECK(e32 < e16);
  double order = std::log2(e8 / e16);
  CHECK(order > 0.85);
  CHECK(std::log2(e16 / e32) > 0.8);

  // mid-interval sampling beats interval-start sampling
  CHECK((run_at(16.0, true) - ref).norm() < e16);
}

TEST_CASE("reduced-model pulses follow the same phase convention") {
  ReducedModel rm{0.7, -0.4, 0.3};
  Sequence p;
  p.add_pulse(make_pulse(PulseTarget::nv1, PulseKind::pi, PulsePhase::x, 20.0,
                         Envelope::instantaneous));
  Mat u = propagate_reduced(rm, p);
  REQUIRE(u.rows() == 4);
  CHECK(is_unitary(u, 1e-12));
  // basis (|01>,|00>,|11>,|10>): an NV1 flip exchanges (0,2) and (1,3)
  CHECK(std::abs(std::abs(u(2, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(std::abs(u(3, 1)) - 1.0) < 1e-12);
  CHECK(std::abs(u(0, 0)) < 1e-12);

  Sequence h;
  h.add_pulse(make_pulse(PulseTarget::nv1, PulseKind::pi_half, PulsePhase::x,
                         20.0, Envelope::instantaneous));
  Mat uh = propagate_reduced(rm, h);
  cxd c0 = uh(1, 1), c1 = uh(3, 1);
  CHECK(2.0 * std::imag(std::conj(c0) * c1) == doctest::Approx(-1.0));
}
