#include "nvreg/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace nvreg {

namespace {

// diagonalize a 3x3 electron Hamiltonian; returns the unitary whose column k
// is the eigenstate labeled by basis index k (+1, 0, -1 order), phase-fixed,
// plus the eigenvalues in that label order
struct LabeledEigen {
  Mat vectors;  // 3x3
  Eigen::Vector3d values;
};

LabeledEigen labeled_electron_eigen(const Mat& he) {
  Eigen::SelfAdjointEigenSolver<Mat> es(he);
  const auto& ev = es.eigenvalues();
  for (int i = 0; i + 1 < 3; ++i)
    if ((ev(i + 1) - ev(i)) / two_pi < 0.1)
      throw degeneracy_error((ev(i + 1) - ev(i)) / two_pi);

  LabeledEigen out;
  out.vectors = Mat::Zero(3, 3);
  std::array<bool, 3> taken{false, false, false};
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXcd v = es.eigenvectors().col(k);
    int label = 0;
    double best = -1.0;
    for (int j = 0; j < 3; ++j)
      if (std::abs(v(j)) > best) {
        best = std::abs(v(j));
        label = j;
      }
    if (taken[label]) throw degeneracy_error(0.0);
    taken[label] = true;
    v *= std::conj(v(label)) / std::abs(v(label));
    out.vectors.col(label) = v;
    out.values(label) = ev(k);
  }
  return out;
}

Mat level_projector(int index) {
  Mat p = Mat::Zero(3, 3);
  p(index, index) = 1.0;
  return p;
}

}  // namespace

Mat build_single_nv(const NvParameters& params,
                    const std::array<double, 3>& b_vec_gauss) {
  const Mat sx = spin1_x(), sy = spin1_y(), sz = spin1_z();
  const Mat id3 = ident(3);
  const std::array<Mat, 3> s{sx, sy, sz};

  Mat he = two_pi * params.d * sz * sz;
  if (params.e != 0.0) he += two_pi * params.e * (sx * sx - sy * sy);
  Mat hn = -two_pi * params.q * sz * sz;
  Mat hhf = Mat::Zero(9, 9);
  for (int k = 0; k < 3; ++k) {
    const double we_k = -two_pi * params.gamma_e * b_vec_gauss[k];
    const double wn_k = -two_pi * params.gamma_n * b_vec_gauss[k];
    he += we_k * s[k];
    hn += wn_k * s[k];
    hhf -= two_pi * params.a_diag[k] * kron(s[k], s[k]);
  }
  return kron(he, id3) + kron(id3, hn) + hhf;
}

Mat rotate_nv1_frame(const Mat& op, double beta_deg) {
  if (op.rows() != 9 || op.cols() != 9)
    throw std::invalid_argument("rotate_nv1_frame: expected a 9x9 operator");
  const Mat sy_tot = kron(spin1_y(), ident(3)) + kron(ident(3), spin1_y());
  const Mat w = expm_herm(sy_tot, -beta_deg * deg);  // exp(+i beta Sy_tot)
  return w * op * w.adjoint();
}

PairModel build_pair_model(const NvParameters& nv1, const NvParameters& nv2,
                           const FieldGeometry& geometry, double nu_dip,
                           std::array<QubitLevel, 2> qubit_basis,
                           std::optional<std::array<double, 2>> carriers) {
  PairModel m;
  m.nv1 = nv1;
  m.nv2 = nv2;
  m.geometry = geometry;
  m.nu_dip = nu_dip;
  m.qubit_basis = qubit_basis;

  const std::array<double, 2> thetas{geometry.theta1, geometry.theta2};
  const std::array<double, 2> phis{geometry.phi, 0.0};
  const Mat sx = spin1_x(), sy = spin1_y(), sz = spin1_z();
  const Mat ix = spin1_x();
  const Mat id3 = ident(3);

  std::array<LabeledEigen, 2> eig;
  for (int i = 0; i < 2; ++i) {
    const NvParameters& p = m.nv(i);
    const double th = thetas[i] * deg, ph = phis[i] * deg;
    const std::array<double, 3> b{
        geometry.b_mag * std::sin(th) * std::cos(ph),
        geometry.b_mag * std::sin(th) * std::sin(ph),
        geometry.b_mag * std::cos(th)};
    m.h_single[i] = build_single_nv(p, b);

    Mat he = two_pi * p.d * sz * sz;
    if (p.e != 0.0) he += two_pi * p.e * (sx * sx - sy * sy);
    he += -two_pi * p.gamma_e * (b[0] * sx + b[1] * sy + b[2] * sz);
    eig[i] = labeled_electron_eigen(he);
    m.t_electron[i] = eig[i].vectors;
  }

  m.t_transform = kron(kron(m.t_electron[0], id3),
                       kron(m.t_electron[1], id3));

  const Mat id9 = ident(9);
  const Mat pair_lab = kron(m.h_single[0], id9) + kron(id9, m.h_single[1]);
  const Mat sz1 = embed(sz, Slot::nv1_electron);
  const Mat sz2 = embed(sz, Slot::nv2_electron);
  m.h_free = m.t_transform.adjoint() * pair_lab * m.t_transform +
             (two_pi * nu_dip) * sz1 * sz2;

  // per-NV transitions at mI = 0 from the exact 9x9 spectrum, eigenstates
  // labeled by overlap with (electron eigenvector) x (nuclear basis)
  for (int i = 0; i < 2; ++i) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m.h_single[i]);
    Eigen::Matrix<double, 3, 3> energy;  // [electron label][mI label]
    std::array<std::array<bool, 3>, 3> seen{};
    for (int k = 0; k < 9; ++k) {
      const Eigen::VectorXcd v = es.eigenvectors().col(k);
      int le = 0, ln = 0;
      double best = -1.0;
      for (int a = 0; a < 3; ++a) {
        const Eigen::VectorXcd cand0 = eig[i].vectors.col(a);
        for (int b = 0; b < 3; ++b) {
          cxd ov = 0.0;
          for (int j = 0; j < 3; ++j) ov += std::conj(cand0(j)) * v(3 * j + b);
          if (std::abs(ov) > best) {
            best = std::abs(ov);
            le = a;
            ln = b;
          }
        }
      }
      if (seen[le][ln]) throw degeneracy_error(0.0);
      seen[le][ln] = true;
      energy(le, ln) = es.eigenvalues()(k);
    }
    const double nu_plus = (energy(0, 1) - energy(1, 1)) / two_pi;
    const double nu_minus = (energy(2, 1) - energy(1, 1)) / two_pi;
    m.transitions[i] = {std::min(nu_plus, nu_minus),
                        std::max(nu_plus, nu_minus)};
    const int lower_idx = nu_plus < nu_minus ? 0 : 2;
    const int upper_idx = nu_plus < nu_minus ? 2 : 0;
    m.qubit_levels[i] = {
        1, qubit_basis[i] == QubitLevel::e1 ? lower_idx : upper_idx};
  }

  if (carriers) {
    m.carriers = *carriers;
  } else {
    for (int i = 0; i < 2; ++i)
      m.carriers[i] = qubit_basis[i] == QubitLevel::e1 ? m.transitions[i][0]
                                                       : m.transitions[i][1];
  }

  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      m.qubit_projectors[2 * a + b] =
          embed(level_projector(m.qubit_levels[0][a]), Slot::nv1_electron) *
          embed(level_projector(m.qubit_levels[1][b]), Slot::nv2_electron);

  m.gamma_ratio = nv1.gamma_n / nv1.gamma_e;
  m.drive_full = Mat::Zero(81, 81);
  m.drive_electron = Mat::Zero(81, 81);
  for (int i = 0; i < 2; ++i) {
    const Slot es_slot = i == 0 ? Slot::nv1_electron : Slot::nv2_electron;
    const Slot ns_slot = i == 0 ? Slot::nv1_nuclear : Slot::nv2_nuclear;
    const Mat sx_eig = m.t_electron[i].adjoint() * sx * m.t_electron[i];
    const double ratio = m.nv(i).gamma_n / m.nv(i).gamma_e;
    m.drive_electron += embed(sx_eig, es_slot);
    m.drive_full += embed(sx_eig, es_slot) + ratio * embed(ix, ns_slot);
    const Mat pq = level_projector(m.qubit_levels[i][0]) +
                   level_projector(m.qubit_levels[i][1]);
    m.drive_qubit[i] = embed(pq * sx_eig * pq, es_slot);
  }

  return m;
}

PairModel with_coupling(const PairModel& model, double nu_dip_mhz) {
  PairModel m = model;
  const Mat sz1 = embed(spin1_z(), Slot::nv1_electron);
  const Mat sz2 = embed(spin1_z(), Slot::nv2_electron);
  m.h_free += two_pi * (nu_dip_mhz - model.nu_dip) * sz1 * sz2;
  m.nu_dip = nu_dip_mhz;
  return m;
}

Mat microwave_hamiltonian(const PairModel& model,
                          const std::array<CarrierDrive, 2>& drives,
                          double t_us, const DriveOptions& opts) {
  Mat h = Mat::Zero(81, 81);
  for (int i = 0; i < 2; ++i) {
    const double w = two_pi * model.carriers[i];
    const double c =
        std::sqrt(2.0) * (drives[i].omega_x * std::cos(w * t_us + drives[i].xi) +
                          drives[i].omega_y * std::sin(w * t_us + drives[i].xi));
    if (c == 0.0) continue;
    if (opts.crosstalk)
      h += c * (opts.drive_nuclear ? model.drive_full : model.drive_electron);
    else
      h += c * model.drive_qubit[i];
  }
  return h;
}

Mat reduced_two_qubit_hamiltonian(double delta1, double delta2, double g,
                                  double omega1, double omega2) {
  Mat h = Mat::Zero(4, 4);
  h(0, 0) = delta2;
  h(2, 2) = delta1 + delta2 - g;
  h(3, 3) = delta1;
  // NV2 drive couples |0x> <-> |1x> of the second qubit
  h(0, 1) = h(1, 0) = omega2 / 2.0;
  h(2, 3) = h(3, 2) = omega2 / 2.0;
  // NV1 drive couples the first qubit
  h(0, 2) = h(2, 0) = omega1 / 2.0;
  h(1, 3) = h(3, 1) = omega1 / 2.0;
  return h;
}

}  // namespace nvreg
