#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "models.hpp"
#include "nvreg/algebra.hpp"
#include "nvreg/sequences.hpp"

using namespace nvreg;

namespace {

// pulse centers of one target extracted by walking the schedule
std::vector<double> centers_of(const Sequence& seq, PulseTarget target) {
  std::vector<double> centers;
  double t = 0.0;
  for (const auto& item : seq.items) {
    if (item.is_pulse) {
      if (item.pulse.target == target)
        centers.push_back(t + item.pulse.duration / 2.0);
      t += item.pulse.duration;
    } else {
      t += item.free_ns;
    }
  }
  return centers;
}

int q_idx(const PairModel& m, int a, int b) {
  return ((m.qubit_levels[0][a] * 3 + 1) * 3 + m.qubit_levels[1][b]) * 3 + 1;
}

// 4x4 qubit-subspace block of an 81x81 unitary at mI = 0 on both nuclei, in
// the reduced basis order (|01>, |00>, |11>, |10>)
Mat qubit_block(const PairModel& m, const Mat& u) {
  const std::array<std::array<int, 2>, 4> order{{{0, 1}, {0, 0}, {1, 1}, {1, 0}}};
  Mat q(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      q(r, c) = u(q_idx(m, order[r][0], order[r][1]),
                  q_idx(m, order[c][0], order[c][1]));
  return q;
}

}  // namespace

TEST_CASE("decoupling train layout") {
  double tau1 = 400.0, rabi = 23.7;
  Sequence seq = build_xy8(PulseTarget::nv1, tau1, 2, rabi);
  CHECK(seq.total_duration() == doctest::Approx(16 * tau1));

  auto centers = centers_of(seq, PulseTarget::nv1);
  REQUIRE(centers.size() == 16);
  for (int k = 0; k < 16; ++k)
    CHECK(centers[k] == doctest::Approx((k + 0.5) * tau1));

  const PulsePhase want[8] = {PulsePhase::x, PulsePhase::y, PulsePhase::x,
                              PulsePhase::y, PulsePhase::y, PulsePhase::x,
                              PulsePhase::y, PulsePhase::x};
  int k = 0;
  for (const auto& item : seq.items)
    if (item.is_pulse) {
      CHECK(item.pulse.phase == want[k % 8]);
      CHECK(item.pulse.kind == PulseKind::pi);
      ++k;
    }

  // a spacing shorter than the pulse cannot be scheduled
  CHECK_THROWS_AS(build_xy8(PulseTarget::nv1, 20.0, 1, 23.7),
                  std::invalid_argument);
}

TEST_CASE("entangling body interleaves the two pulse trains") {
  double tau1 = 400.0, tau2 = 50.0, rabi = 25.0;
  Sequence seq = build_sqrt_zz(tau1, tau2, 4, rabi);
  CHECK(seq.total_duration() == doctest::Approx(4 * tau1));

  auto c1 = centers_of(seq, PulseTarget::nv1);
  auto c2 = centers_of(seq, PulseTarget::nv2);
  REQUIRE(c1.size() == 4);
  REQUIRE(c2.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(c1[k] == doctest::Approx((k + 0.5) * tau1));
    CHECK(c2[k] == doctest::Approx((k + 1) * tau1 - tau2));
  }

  // negative offsets shift the partner train into the previous period
  Sequence neg = build_sqrt_zz(tau1, -tau2, 4, rabi);
  auto c2n = centers_of(neg, PulseTarget::nv2);
  REQUIRE(c2n.size() == 4);
  for (int k = 0; k < 4; ++k)
    CHECK(c2n[k] == doctest::Approx(k * tau1 + tau2));
  CHECK(neg.total_duration() == doctest::Approx(4 * tau1));

  CHECK_THROWS_AS(build_sqrt_zz(tau1, 0.6 * tau1, 4, rabi),
                  std::invalid_argument);
}

TEST_CASE("closed-form gate walks the toggled detuning pattern") {
  double tau1 = 400.0, tau2 = 50.0;
  double g = 0.45, d1 = 1.3, d2 = -0.7;
  AnalyticGate gate = analytic_gate_unitary(tau1, tau2, 2, g, d1, d2);

  const std::vector<double> durations{200.0, 150.0, 250.0, 150.0, 50.0};
  REQUIRE(gate.period_ns.size() == durations.size());
  for (size_t i = 0; i < durations.size(); ++i)
    CHECK(gate.period_ns[i] == doctest::Approx(durations[i]));

  auto diag4 = [](double a, double b, double c, double d) {
    Mat m = Mat::Zero(4, 4);
    m(0, 0) = a;
    m(1, 1) = b;
    m(2, 2) = c;
    m(3, 3) = d;
    return m;
  };
  const std::vector<Mat> want{
      diag4(d2, 0, d1 + d2 - g, d1), diag4(d1 + d2 - g, d1, d2, 0),
      diag4(d1, d1 + d2 - g, 0, d2), diag4(0, d2, d1, d1 + d2 - g),
      diag4(d2, 0, d1 + d2 - g, d1)};
  REQUIRE(gate.period_h.size() == want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    CHECK(frobenius_distance(gate.period_h[i], want[i]) < 1e-12);
    for (size_t j = 0; j < i; ++j)  // intervals commute pairwise
      CHECK((gate.period_h[i] * gate.period_h[j] -
             gate.period_h[j] * gate.period_h[i]).norm() < 1e-14);
  }
}

TEST_CASE("gate phase depends only on the accumulated coupling area") {
  // zero offset: the echo cancels everything
  AnalyticGate id = analytic_gate_unitary(800.0, 0.0, 4, 0.9, 1.1, -0.3);
  CHECK(process_fidelity(id.unitary, ident(4)) > 1.0 - 1e-12);

  // quarter-turn entangler: n_pi * g * tau2 = pi/2
  double g = two_pi * 0.1198;
  int n_pi = 8;
  double tau2_us = 1.0 / (4.0 * n_pi * 0.1198);
  AnalyticGate q =
      analytic_gate_unitary(800.0, tau2_us * 1000.0, n_pi, g, 1.3, -0.7);
  Mat w = q.unitary / q.unitary(0, 0);
  CHECK(std::abs(w(0, 0) - cxd(1, 0)) < 1e-9);
  CHECK(std::abs(w(1, 1) - cxd(0, 1)) < 1e-9);
  CHECK(std::abs(w(2, 2) - cxd(0, 1)) < 1e-9);
  CHECK(std::abs(w(3, 3) - cxd(1, 0)) < 1e-9);

  // detunings only contribute a global phase
  AnalyticGate q2 =
      analytic_gate_unitary(800.0, tau2_us * 1000.0, n_pi, g, -2.4, 0.9);
  CHECK(process_fidelity(q.unitary, q2.unitary) > 1.0 - 1e-12);

  // four quarter turns close the cycle
  Mat u4 = q.unitary * q.unitary * q.unitary * q.unitary;
  CHECK(process_fidelity(u4, ident(4)) > 1.0 - 1e-6);
}

TEST_CASE("numeric reduced propagation matches the closed form") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> utau1(300.0, 900.0);
  std::uniform_real_distribution<double> ufrac(-0.45, 0.45);
  std::uniform_real_distribution<double> ug(0.05, 0.3);
  std::uniform_real_distribution<double> ud(-0.5, 0.5);
  const int n_pis[3] = {2, 4, 8};
  for (int i = 0; i < 12; ++i) {
    double tau1 = utau1(rng);
    double tau2 = ufrac(rng) * tau1;
    double g = two_pi * ug(rng);
    double d1 = two_pi * ud(rng), d2 = two_pi * ud(rng);
    int n_pi = n_pis[i % 3];

    ReducedModel rm{d1, d2, g};
    Sequence seq =
        build_sqrt_zz(tau1, tau2, n_pi, 20.0, Envelope::instantaneous);
    Mat u_num = propagate_reduced(rm, seq);
    AnalyticGate ref = analytic_gate_unitary(tau1, tau2, n_pi, g, d1, d2);
    CHECK(process_fidelity(u_num, ref.unitary) > 1.0 - 1e-10);
  }
}

TEST_CASE("full register propagation reproduces the closed form") {
  struct Tuple {
    double tau1, tau2, nu, det1, det2;
    int n_pi;
  };
  const Tuple tuples[] = {{500.0, 120.0, 0.15, 0.3, -0.2, 2},
                          {640.0, -150.0, 0.22, -0.4, 0.25, 4},
                          {800.0, 37.3, 0.11, 0.1, 0.05, 8}};
  for (const auto& tp : tuples) {
    PairModel m = bare_pair_model(180.0, 40.0, 70.0, tp.nu, tp.det1, tp.det2);
    Propagator prop(m);
    Sequence seq = build_sqrt_zz(tp.tau1, tp.tau2, tp.n_pi, 20.0,
                                 Envelope::instantaneous);
    Mat u4 = qubit_block(m, prop.run(seq));
    AnalyticGate ref =
        analytic_gate_unitary(tp.tau1, tp.tau2, tp.n_pi, two_pi * tp.nu,
                              two_pi * tp.det1, two_pi * tp.det2);
    CHECK(process_fidelity(u4, ref.unitary) > 1.0 - 1e-8);
  }
}

TEST_CASE("double resonance scan recovers the coupling") {
  PairModel m = setting2_model();
  std::vector<double> tau2;
  for (int i = 0; i <= 24; ++i) tau2.push_back(400.0 * i / 24);
  DeerOptions opts;
  DeerResult res = deer_scan(m, 800.0, tau2, 32, opts);
  CHECK(std::abs(res.nu_dip_mhz - 0.11289) < 0.01 * 0.11289);
  CHECK(res.t_evol_us.back() == doctest::Approx(32 * 0.4));

  // flipping the control inverts the accumulated phase
  std::vector<double> probe{60.0, 140.0, 220.0};
  DeerOptions flip = opts;
  flip.control_state = 0;
  DeerResult a = deer_scan(m, 800.0, probe, 8, opts);
  DeerResult b = deer_scan(m, 800.0, probe, 8, flip);
  for (size_t i = 0; i < probe.size(); ++i)
    CHECK(std::abs(a.signal[i] + b.signal[i]) < 2e-3);
}

TEST_CASE("gate calibration lands on the quarter-turn evolution time") {
  PairModel m = setting2_model(0.1198);
  std::vector<double> tau2;
  for (int i = 0; i <= 20; ++i) tau2.push_back(15.0 * i);
  GateCalibration cal = calibrate_tau2(m, 800.0, 8, tau2);
  CHECK(std::abs(cal.t_evol_us - 2.087) < 0.0105);
  CHECK(std::abs(cal.nu_dip_mhz - 0.1198) < 0.0007);
  CHECK(cal.tau2_sqrtzz_ns == doctest::Approx(cal.t_evol_us * 1000.0 / 8));
}

TEST_CASE("decoupling window scan reports a best spacing") {
  PairModel m = setting2_model();
  std::vector<double> tau1{500.0, 650.0, 800.0};
  Tau1Scan scan = scan_tau1(m, tau1, 1, 20.0);
  REQUIRE(scan.survival.size() == 3);
  double best = -1.0;
  for (size_t i = 0; i < 3; ++i) {
    CHECK(scan.survival[i] > -1.001);
    CHECK(scan.survival[i] < 1.001);
    best = std::max(best, scan.survival[i]);
  }
  size_t rec = 0;
  while (rec < 3 && scan.tau1_ns[rec] != scan.recommended_tau1_ns) ++rec;
  REQUIRE(rec < 3);
  CHECK(scan.survival[rec] == doctest::Approx(best));
}
