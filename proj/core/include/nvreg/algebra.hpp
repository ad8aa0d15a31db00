#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

// Conventions used across the library:
//  - public interfaces take cyclic frequencies in MHz, times in ns, fields in G,
//    angles in degrees unless a name says otherwise
//  - internal Hamiltonians are angular (rad/us), internal times are us
//  - spin-1 basis order is (+1, 0, -1); the register order is
//    NV1 electron x NV1 nuclear x NV2 electron x NV2 nuclear (dim 81)

namespace nvreg {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = 3.1415926535897932384626433832795;
inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double deg = 0.017453292519943295769236907684886;  // rad per degree

// spin-1 operators, basis (+1, 0, -1)
Mat spin1_x();
Mat spin1_y();
Mat spin1_z();
Mat ident(int n);

Mat kron(const Mat& a, const Mat& b);

// slots of the two-register layout, each of dimension 3
enum class Slot { nv1_electron = 0, nv1_nuclear = 1, nv2_electron = 2, nv2_nuclear = 3 };

inline const std::vector<int>& pair_dims() {
  static const std::vector<int> d{3, 3, 3, 3};
  return d;
}

// op acting on dims[slot], identity elsewhere
Mat embed(const Mat& op, int slot, const std::vector<int>& dims);
Mat embed(const Mat& op, Slot slot);

// reduce rho over all slots not listed in keep (ascending order expected)
Mat partial_trace(const Mat& rho, const std::vector<int>& dims, const std::vector<int>& keep);

// electron pair state, dim 9 (NV1e x NV2e)
Mat trace_out_nuclear(const Mat& rho81);
// single electron state, dim 3
Mat reduce_to_electron(const Mat& rho81, int nv);  // nv = 1 or 2

bool is_hermitian(const Mat& m, double tol = 1e-10);
bool is_unitary(const Mat& m, double tol = 1e-10);

// exp(A) for a general square matrix, scaling-and-squaring Taylor
Mat expm(const Mat& a);
// exp(-i*scale*H) for Hermitian H via eigendecomposition
Mat expm_herm(const Mat& h, double scale);

// |tr(Udag V)|^2 / d^2, global-phase free
double process_fidelity(const Mat& u, const Mat& v);

double frobenius_distance(const Mat& a, const Mat& b);

}  // namespace nvreg
