#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "models.hpp"
#include "nvreg/algebra.hpp"
#include "nvreg/constants.hpp"
#include "nvreg/hamiltonian.hpp"

using namespace nvreg;

TEST_CASE("single NV spectrum is exact for an aligned field") {
  NvParameters p;
  p.a_diag = {0.0, 0.0, a_par_mhz};  // axial coupling keeps the basis exact
  double b = 80.0;
  Mat h = build_single_nv(p, {0.0, 0.0, b});
  REQUIRE(h.rows() == 9);
  CHECK(is_hermitian(h, 1e-12));

  std::vector<double> expected;
  for (int ms : {1, 0, -1})
    for (int mi : {1, 0, -1})
      expected.push_back(two_pi * (p.d * ms * ms - p.gamma_e * b * ms -
                                   p.q * mi * mi - p.gamma_n * b * mi -
                                   p.a_diag[2] * ms * mi));
  std::sort(expected.begin(), expected.end());

  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  for (int i = 0; i < 9; ++i)
    CHECK(std::abs(es.eigenvalues()(i) - expected[i]) < 1e-9);

  // the transverse coupling only shifts levels at second order, ~A_perp^2/D
  NvParameters full;
  Mat hf = build_single_nv(full, {0.0, 0.0, b});
  Eigen::SelfAdjointEigenSolver<Mat> ef(hf);
  double bound = two_pi * 3.0 * full.a_diag[0] * full.a_diag[0] / full.d;
  for (int i = 0; i < 9; ++i)
    CHECK(std::abs(ef.eigenvalues()(i) - expected[i]) < bound);
}

TEST_CASE("frame rotation aligns a tilted axis with z") {
  double beta = beta_tetra_deg;
  Mat tilted_axis = std::sin(beta * deg) * spin1_x() +
                    std::cos(beta * deg) * spin1_z();
  Mat op = kron(tilted_axis, ident(3)) + kron(ident(3), tilted_axis);
  Mat expect = kron(spin1_z(), ident(3)) + kron(ident(3), spin1_z());
  CHECK(frobenius_distance(rotate_nv1_frame(op, beta), expect) < 1e-12);
  // spectrum is untouched
  NvParameters p;
  Mat h = build_single_nv(p, {30.0, 10.0, 50.0});
  Eigen::SelfAdjointEigenSolver<Mat> a(h), r(rotate_nv1_frame(h, beta));
  for (int i = 0; i < 9; ++i)
    CHECK(std::abs(a.eigenvalues()(i) - r.eigenvalues()(i)) < 1e-9);
}

TEST_CASE("pair model reproduces the tabulated transition frequencies") {
  PairModel m2 = setting2_model();
  CHECK(std::abs(m2.transitions[0][0] - 2827.3) < 0.15);
  CHECK(std::abs(m2.transitions[0][1] - 2990.8) < 0.15);
  CHECK(std::abs(m2.transitions[1][0] - 2571.0) < 0.15);
  CHECK(std::abs(m2.transitions[1][1] - 3160.2) < 0.15);

  // default basis (e2, e1): NV1 drives its upper transition, NV2 its lower
  CHECK(m2.carriers[0] == m2.transitions[0][1]);
  CHECK(m2.carriers[1] == m2.transitions[1][0]);
  CHECK(m2.qubit_levels[0][0] == 1);
  CHECK(m2.qubit_levels[0][1] == 2);
  CHECK(m2.qubit_levels[1][0] == 1);
  CHECK(m2.qubit_levels[1][1] == 0);

  PairModel m1 = setting1_model();
  CHECK(std::abs(m1.transitions[0][0] - 2829.4) < 0.15);
  CHECK(std::abs(m1.transitions[0][1] - 2932.5) < 0.15);
  CHECK(m1.carriers[0] == m1.transitions[0][1]);
  CHECK(m1.carriers[1] == m1.transitions[1][0]);
}

TEST_CASE("pair Hamiltonian structure") {
  PairModel m = setting2_model();
  REQUIRE(m.h_free.rows() == 81);
  CHECK(is_hermitian(m.h_free, 1e-9));
  CHECK(is_unitary(m.t_transform, 1e-11));
  CHECK(std::abs(m.gamma_ratio - gamma_n14_mhz_g / gamma_e_mhz_g) < 1e-12);

  // the qubit-projector combination isolates the secular dipolar term; with
  // basis (e2, e1) the sz product of the |11> level pair is -1
  Mat combo = m.qubit_projectors[0] - m.qubit_projectors[1] -
              m.qubit_projectors[2] + m.qubit_projectors[3];
  double g_eff = (combo * m.h_free).trace().real() / 9.0;
  CHECK(std::abs(g_eff - (-two_pi * m.nu_dip)) < 1e-9);
}

TEST_CASE("coupling can be rescaled without rebuilding") {
  PairModel m = setting2_model();
  PairModel m0 = with_coupling(m, 0.0);
  CHECK(m0.nu_dip == 0.0);
  Mat combo = m.qubit_projectors[0] - m.qubit_projectors[1] -
              m.qubit_projectors[2] + m.qubit_projectors[3];
  CHECK(std::abs((combo * m0.h_free).trace().real()) < 1e-9);
  PairModel back = with_coupling(m0, m.nu_dip);
  CHECK(frobenius_distance(back.h_free, m.h_free) < 1e-10);
}

TEST_CASE("degenerate labeling is rejected") {
  NvParameters p;
  FieldGeometry geo;  // zero field: +1 and -1 levels coincide
  CHECK_THROWS_AS(build_pair_model(p, p, geo, 0.1), degeneracy_error);
}

TEST_CASE("microwave term is hermitian and crosstalk can be confined") {
  PairModel m = setting2_model();
  std::array<CarrierDrive, 2> drives{};
  drives[0].omega_x = two_pi * 20.0;
  drives[0].xi = 0.3;
  CHECK(is_hermitian(microwave_hamiltonian(m, drives, 0.0137), 1e-10));

  DriveOptions confined;
  confined.crosstalk = false;
  Mat hc = microwave_hamiltonian(m, drives, 0.0, confined);
  CHECK(is_hermitian(hc, 1e-10));
  CHECK(hc.norm() > 1.0);
  // confined drive on NV1 leaves every NV2 operator untouched
  Mat sz2 = embed(spin1_z(), Slot::nv2_electron);
  CHECK((hc * sz2 - sz2 * hc).norm() < 1e-10);
  // the full drive reaches the second register through the shared field
  Mat h0 = microwave_hamiltonian(m, drives, 0.0);
  Mat sx2 = embed(spin1_x(), Slot::nv2_electron);
  CHECK((h0 * sx2 - sx2 * h0).norm() > 1e-3);
}

TEST_CASE("reduced two-qubit Hamiltonian layout") {
  double d1 = 1.3, d2 = -0.7, g = 0.45, o1 = 2.1, o2 = 0.9;
  Mat h = reduced_two_qubit_hamiltonian(d1, d2, g, o1, o2);
  REQUIRE(h.rows() == 4);
  CHECK(is_hermitian(h, 1e-14));
  CHECK(std::abs(h(0, 0).real() - d2) < 1e-14);
  CHECK(std::abs(h(1, 1).real() - 0.0) < 1e-14);
  CHECK(std::abs(h(2, 2).real() - (d1 + d2 - g)) < 1e-14);
  CHECK(std::abs(h(3, 3).real() - d1) < 1e-14);
  // NV1 drive couples (|01>,|11>) and (|00>,|10>)
  CHECK(std::abs(h(0, 2) - cxd(o1 / 2, 0)) < 1e-14);
  CHECK(std::abs(h(1, 3) - cxd(o1 / 2, 0)) < 1e-14);
  // NV2 drive couples (|01>,|00>) and (|11>,|10>)
  CHECK(std::abs(h(0, 1) - cxd(o2 / 2, 0)) < 1e-14);
  CHECK(std::abs(h(2, 3) - cxd(o2 / 2, 0)) < 1e-14);
}
