#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "nvreg/algebra.hpp"
#include "nvreg/constants.hpp"
#include "nvreg/geometry.hpp"

namespace nvreg {

// Scalar inputs are cyclic MHz / Gauss / degrees; every operator matrix this
// module hands out carries angular units (rad/us). Signs of the quadrupole
// and hyperfine terms follow the source convention H0 = D Sz^2 + we.S
// - Q Iz^2 + wn.I - S A I with we/n = -gamma_e/n B, even where common
// literature flips them; the tabulated Q and A values below are the matching
// negative numbers.
struct NvParameters {
  double d = 2870.0;
  double e = 0.0;
  double q = q_14n_mhz;
  std::array<double, 3> a_diag{a_perp_mhz, a_perp_mhz, a_par_mhz};
  double gamma_e = gamma_e_mhz_g;  // cyclic MHz per G
  double gamma_n = gamma_n14_mhz_g;
  double contrast_alpha = 0.15;    // readout contrast fraction
};

// which electron level plays |1>: partner of the ms=0-like ground state at
// the lower (e1) or upper (e2) transition
enum class QubitLevel { e1, e2 };

struct degeneracy_error : std::runtime_error {
  double gap_mhz;
  explicit degeneracy_error(double gap)
      : std::runtime_error(
            "electron eigenstate labeling ambiguous: level gap " +
            std::to_string(gap) + " MHz below threshold"),
        gap_mhz(gap) {}
};

// Immutable pair model in the effective picture: per-NV Hamiltonians built in
// their own axis frames, electron parts diagonalized by T (columns ordered
// and labeled +1, 0, -1 by maximal overlap, dominant component phase-fixed real
// positive), secular zz coupling added in the eigenbasis.
struct PairModel {
  NvParameters nv1, nv2;
  FieldGeometry geometry;
  double nu_dip = 0.0;  // cyclic MHz
  std::array<QubitLevel, 2> qubit_basis{QubitLevel::e2, QubitLevel::e1};
  std::array<double, 2> carriers{};  // cyclic MHz

  Mat h_free;       // 81x81, rad/us, electron eigenbasis
  Mat t_transform;  // 81x81 unitary
  std::array<Mat, 2> t_electron;  // 3x3 per NV
  std::array<Mat, 2> h_single;    // 9x9 per NV, own frame, lab basis, rad/us
  // electron-pair projectors |00>,|01>,|10>,|11> (identity on nuclear slots)
  std::array<Mat, 4> qubit_projectors;
  std::array<std::array<int, 2>, 2> qubit_levels{};  // per NV {|0> idx, |1> idx}
  // per NV (lower, upper) electron transition at mI = 0, cyclic MHz
  std::array<std::array<double, 2>, 2> transitions{};
  Mat drive_full;                  // sum over NVs of Sx + gamma_ratio Ix, eigenbasis
  Mat drive_electron;              // same without the nuclear terms
  std::array<Mat, 2> drive_qubit;  // per NV, restricted to its qubit 2x2 block
  double gamma_ratio = 0.0;

  const NvParameters& nv(int i) const { return i == 0 ? nv1 : nv2; }
};

// Single-NV Hamiltonian (electron x nuclear, 9x9, rad/us) for a field given
// in Gauss in that NV's own frame.
Mat build_single_nv(const NvParameters& params,
                    const std::array<double, 3>& b_vec_gauss);

// Rotate an operator on one NV's 9-dim space (both spins) about y by -beta,
// aligning an axis tilted by beta in the x-z plane with z.
Mat rotate_nv1_frame(const Mat& op, double beta_deg);

// Assemble the effective-picture pair model. carriers omitted -> computed
// from the chosen qubit transitions at mI = 0.
PairModel build_pair_model(
    const NvParameters& nv1, const NvParameters& nv2,
    const FieldGeometry& geometry, double nu_dip,
    std::array<QubitLevel, 2> qubit_basis = {QubitLevel::e2, QubitLevel::e1},
    std::optional<std::array<double, 2>> carriers = std::nullopt);

// Instantaneous per-carrier drive values; envelope amplitudes in rad/us.
struct CarrierDrive {
  double omega_x = 0.0;
  double omega_y = 0.0;
  double xi = 0.0;  // carrier phase, radians
};

struct DriveOptions {
  bool crosstalk = true;      // false: drive acts only on the addressed qubit block
  bool drive_nuclear = true;  // include the gamma-scaled nuclear Ix term
};

// Lab-frame microwave Hamiltonian at absolute time t (81x81, rad/us):
// sum_i sqrt(2) [Ox cos(w_i t + xi_i) + Oy sin(w_i t + xi_i)] * drive operator.
// copy of the model with the dipolar coupling rescaled (e.g. 0 for a
// neutral partner)
PairModel with_coupling(const PairModel& model, double nu_dip_mhz);

Mat microwave_hamiltonian(const PairModel& model,
                          const std::array<CarrierDrive, 2>& drives,
                          double t_us, const DriveOptions& opts = {});

// 4x4 rotating-frame Hamiltonian of the addressable qubit subspace in basis
// order (|01>, |00>, |11>, |10>): diagonal (d2, 0, d1+d2-g, d1) with
// omega/2 couplings. All arguments angular rad/us.
Mat reduced_two_qubit_hamiltonian(double delta1, double delta2, double g,
                                  double omega1, double omega2);

}  // namespace nvreg
