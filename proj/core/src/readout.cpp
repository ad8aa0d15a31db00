#include "nvreg/readout.hpp"

#include <cmath>
#include <stdexcept>

#include "nvreg/algebra.hpp"

namespace nvreg {

void ChargeMixture::validate() const {
  double sum = 0.0;
  for (double w : weights) {
    if (w < -1e-12 || w > 1.0 + 1e-12)
      throw std::invalid_argument("charge weight outside [0,1]");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("charge weights must sum to 1");
}

ChargeMixture ChargeMixture::independent(double p1, double p2) {
  if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0)
    throw std::invalid_argument("charge probability outside [0,1]");
  ChargeMixture m;
  m.weights = {p1 * p2, p1 * (1.0 - p2), (1.0 - p1) * p2,
               (1.0 - p1) * (1.0 - p2)};
  return m;
}

namespace {

void check_state(const Mat& rho) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("rho not square");
  if (std::abs(rho.trace().real() - 1.0) > 1e-6 ||
      std::abs(rho.trace().imag()) > 1e-9)
    throw std::invalid_argument("rho trace differs from 1");
}

// per-basis-state bright weights and flip permutation for the supported dims
struct ReadoutLayout {
  Eigen::VectorXd eg;
  std::vector<int> flip;
};

ReadoutLayout layout_for(const PairModel& model, long dim, double a1,
                         double a2) {
  ReadoutLayout lay;
  lay.eg.resize(dim);
  lay.flip.resize(dim);
  double norm = a1 + a2;
  if (norm <= 0.0) throw std::invalid_argument("contrast weights must be > 0");
  if (dim == 9) {
    std::array<std::array<int, 3>, 2> swap{};
    for (int i = 0; i < 2; ++i) {
      swap[i] = {0, 1, 2};
      std::swap(swap[i][1], swap[i][model.qubit_levels[i][1]]);
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        int idx = 3 * a + b;
        lay.eg(idx) = (a1 * (a == 1 ? 1.0 : 0.0) + a2 * (b == 1 ? 1.0 : 0.0)) /
                      norm;
        lay.flip[idx] = 3 * swap[0][a] + swap[1][b];
      }
  } else if (dim == 4) {
    // reduced basis order (|01>, |00>, |11>, |10>)
    lay.eg(0) = a1 / norm;
    lay.eg(1) = 1.0;
    lay.eg(2) = 0.0;
    lay.eg(3) = a2 / norm;
    lay.flip = {3, 2, 1, 0};
  } else {
    throw std::invalid_argument("unsupported rho dimension");
  }
  return lay;
}

}  // namespace

double povm_readout(const PairModel& model, const Mat& rho, double alpha1,
                    double alpha2) {
  check_state(rho);
  double a1 = alpha1 < 0.0 ? model.nv1.contrast_alpha : alpha1;
  double a2 = alpha2 < 0.0 ? model.nv2.contrast_alpha : alpha2;
  Mat r = rho.rows() == 81 ? trace_out_nuclear(rho) : rho;
  ReadoutLayout lay = layout_for(model, r.rows(), a1, a2);
  double val = 0.0;
  for (long i = 0; i < r.rows(); ++i)
    val += lay.eg(i) * (r(i, i).real() - r(lay.flip[i], lay.flip[i]).real());
  return val;
}

double povm_bright(const PairModel& model, const Mat& rho, double alpha1,
                   double alpha2) {
  check_state(rho);
  double a1 = alpha1 < 0.0 ? model.nv1.contrast_alpha : alpha1;
  double a2 = alpha2 < 0.0 ? model.nv2.contrast_alpha : alpha2;
  Mat r = rho.rows() == 81 ? trace_out_nuclear(rho) : rho;
  ReadoutLayout lay = layout_for(model, r.rows(), a1, a2);
  double val = 0.0;
  for (long i = 0; i < r.rows(); ++i) val += lay.eg(i) * r(i, i).real();
  return val;
}

double charge_mixture_signal(const std::array<double, 4>& signals,
                             const ChargeMixture& mixture) {
  mixture.validate();
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += mixture.weights[i] * signals[i];
  return s;
}

double coherence_decay(double t_us, const std::array<double, 2>& t2_us) {
  if (t2_us[0] <= 0.0 || t2_us[1] <= 0.0)
    throw std::invalid_argument("T2 must be positive");
  return std::exp(-0.5 * t_us * (1.0 / t2_us[0] + 1.0 / t2_us[1]));
}

double apply_decoherence(double value, double t_us,
                         const std::array<double, 2>& t2_us) {
  return value * coherence_decay(t_us, t2_us);
}

Mat spin_init_state(double f_init) {
  if (f_init <= 1.0 / 3.0 || f_init > 1.0 + 1e-12)
    throw std::invalid_argument("initialization fidelity outside (1/3, 1]");
  Mat rho = Mat::Zero(3, 3);
  rho(0, 0) = 0.5 * (1.0 - f_init);
  rho(1, 1) = f_init;
  rho(2, 2) = 0.5 * (1.0 - f_init);
  return rho;
}

Mat initial_state(const PairModel& model, double f_init1, double f_init2,
                  bool polarized_nuclear) {
  (void)model;
  Mat nuc;
  if (polarized_nuclear) {
    nuc = Mat::Zero(3, 3);
    nuc(1, 1) = 1.0;
  } else {
    nuc = Mat::Identity(3, 3) / 3.0;
  }
  return kron(kron(spin_init_state(f_init1), nuc),
              kron(spin_init_state(f_init2), nuc));
}

Mat initial_columns(const PairModel& model, bool polarized_nuclear) {
  (void)model;
  std::vector<int> nuclear_levels =
      polarized_nuclear ? std::vector<int>{1} : std::vector<int>{0, 1, 2};
  long k = static_cast<long>(nuclear_levels.size());
  Mat cols = Mat::Zero(81, k * k);
  long col = 0;
  for (int na : nuclear_levels)
    for (int nb : nuclear_levels) {
      long idx = ((1 * 3 + na) * 3 + 1) * 3 + nb;  // electron ground on both
      cols(idx, col) = 1.0;
      ++col;
    }
  return cols;
}

Mat electron_density_from_columns(const Mat& columns) {
  if (columns.rows() != 81) throw std::invalid_argument("columns must be 81-dim");
  long k = columns.cols();
  Mat rho9 = Mat::Zero(9, 9);
  for (long c = 0; c < k; ++c) {
    Mat rho = columns.col(c) * columns.col(c).adjoint();
    rho9 += trace_out_nuclear(rho);
  }
  return rho9 / static_cast<double>(k);
}

}  // namespace nvreg
