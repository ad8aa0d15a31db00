#include "nvreg/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nvreg {

namespace {
const cxd I(0.0, 1.0);
const double inv_sqrt2 = 0.7071067811865475244;
}  // namespace

Mat spin1_x() {
  Mat m = Mat::Zero(3, 3);
  m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = inv_sqrt2;
  return m;
}

Mat spin1_y() {
  Mat m = Mat::Zero(3, 3);
  m(0, 1) = -I * inv_sqrt2;
  m(1, 0) = I * inv_sqrt2;
  m(1, 2) = -I * inv_sqrt2;
  m(2, 1) = I * inv_sqrt2;
  return m;
}

Mat spin1_z() {
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = 1.0;
  m(2, 2) = -1.0;
  return m;
}

Mat ident(int n) { return Mat::Identity(n, n); }

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat embed(const Mat& op, int slot, const std::vector<int>& dims) {
  if (slot < 0 || slot >= static_cast<int>(dims.size()))
    throw std::invalid_argument("embed: slot out of range");
  if (op.rows() != dims[slot] || op.cols() != dims[slot])
    throw std::invalid_argument("embed: operator dimension does not match slot");
  Mat out = Mat::Identity(1, 1);
  for (int k = 0; k < static_cast<int>(dims.size()); ++k)
    out = kron(out, k == slot ? op : Mat(Mat::Identity(dims[k], dims[k])));
  return out;
}

Mat embed(const Mat& op, Slot slot) { return embed(op, static_cast<int>(slot), pair_dims()); }

Mat partial_trace(const Mat& rho, const std::vector<int>& dims, const std::vector<int>& keep) {
  int total = 1;
  for (int d : dims) total *= d;
  if (rho.rows() != total || rho.cols() != total)
    throw std::invalid_argument("partial_trace: dimension mismatch");
  for (size_t i = 1; i < keep.size(); ++i)
    if (keep[i] <= keep[i - 1]) throw std::invalid_argument("partial_trace: keep must be ascending");

  const int n = static_cast<int>(dims.size());
  std::vector<int> strides(n);
  int s = 1;
  for (int k = n - 1; k >= 0; --k) {
    strides[k] = s;
    s *= dims[k];
  }

  int keep_dim = 1;
  for (int k : keep) {
    if (k < 0 || k >= n) throw std::invalid_argument("partial_trace: keep index out of range");
    keep_dim *= dims[k];
  }
  std::vector<int> traced;
  for (int k = 0; k < n; ++k)
    if (std::find(keep.begin(), keep.end(), k) == keep.end()) traced.push_back(k);
  int traced_dim = total / keep_dim;

  // index of the full space from (kept multi-index, traced multi-index)
  auto full_index = [&](int ki, int ti) {
    int idx = 0;
    for (int k = static_cast<int>(keep.size()) - 1; k >= 0; --k) {
      idx += (ki % dims[keep[k]]) * strides[keep[k]];
      ki /= dims[keep[k]];
    }
    for (int k = static_cast<int>(traced.size()) - 1; k >= 0; --k) {
      idx += (ti % dims[traced[k]]) * strides[traced[k]];
      ti /= dims[traced[k]];
    }
    return idx;
  };

  Mat out = Mat::Zero(keep_dim, keep_dim);
  for (int a = 0; a < keep_dim; ++a)
    for (int b = 0; b < keep_dim; ++b) {
      cxd acc(0.0, 0.0);
      for (int t = 0; t < traced_dim; ++t) acc += rho(full_index(a, t), full_index(b, t));
      out(a, b) = acc;
    }
  return out;
}

Mat trace_out_nuclear(const Mat& rho81) { return partial_trace(rho81, pair_dims(), {0, 2}); }

Mat reduce_to_electron(const Mat& rho81, int nv) {
  if (nv != 1 && nv != 2) throw std::invalid_argument("reduce_to_electron: nv must be 1 or 2");
  return partial_trace(rho81, pair_dims(), {nv == 1 ? 0 : 2});
}

bool is_hermitian(const Mat& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const Mat& m, double tol) {
  Mat d = m.adjoint() * m - Mat::Identity(m.rows(), m.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

Mat expm(const Mat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: square matrix required");
  const int n = static_cast<int>(a.rows());
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
  int squarings = 0;
  double target = 0.25;
  if (norm > target) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / target)));
    if (squarings > 60) throw std::invalid_argument("expm: matrix norm too large");
  }
  Mat b = a / std::pow(2.0, squarings);

  // Taylor with Paterson-Stockmeyer grouping, degree 16
  Mat b2 = b * b;
  Mat b3 = b2 * b;
  Mat b4 = b3 * b;
  auto horner4 = [&](double c0, double c1, double c2, double c3) {
    Mat m = c0 * Mat::Identity(n, n);
    m += c1 * b + c2 * b2 + c3 * b3;
    return m;
  };
  std::vector<double> f(17);
  f[0] = 1.0;
  for (int k = 1; k <= 16; ++k) f[k] = f[k - 1] / k;
  Mat p = horner4(f[12], f[13], f[14], f[15]) + f[16] * b4;
  p = horner4(f[8], f[9], f[10], f[11]) + b4 * p;
  p = horner4(f[4], f[5], f[6], f[7]) + b4 * p;
  p = horner4(f[0], f[1], f[2], f[3]) + b4 * p;

  for (int k = 0; k < squarings; ++k) p = p * p;
  return p;
}

Mat expm_herm(const Mat& h, double scale) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("expm_herm: eigensolver failed");
  Vec phases(h.rows());
  for (int k = 0; k < h.rows(); ++k) phases(k) = std::polar(1.0, -scale * es.eigenvalues()(k));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double process_fidelity(const Mat& u, const Mat& v) {
  const double d = static_cast<double>(u.rows());
  cxd tr = (u.adjoint() * v).trace();
  return std::norm(tr) / (d * d);
}

double frobenius_distance(const Mat& a, const Mat& b) { return (a - b).norm(); }

}  // namespace nvreg
