#pragma once

#include <array>

#include "nvreg/hamiltonian.hpp"

namespace nvreg {

// initial charge-state statistics of the pair
struct ChargeMixture {
  // (p--, p-0, p0-, p00); first slot NV1, second NV2
  std::array<double, 4> weights{1.0, 0.0, 0.0, 0.0};
  // fluorescence of a neutral center relative to the negative bright level
  double nv0_level = 1.0;

  void validate() const;
  static ChargeMixture independent(double p_minus_nv1, double p_minus_nv2);
  // apparent sigma-type signal of a neutral center after contrast calibration
  double nv0_sigma() const { return 2.0 * nv0_level - 1.0; }
};

// fluorescence readout R = Tr[Eg rho] - Tr[Eg X12 rho X12^dag] with
// Eg = (a1 |g><g| x 1 + a2 1 x |g><g|) / (a1 + a2) and X12 ideal qubit flips
// on both NVs. rho may be 81-dim (nuclear traced out internally), 9-dim
// electron pair, or 4-dim qubit pair in the reduced basis order
// (|01>, |00>, |11>, |10>). Negative alphas take the model per-NV contrast.
double povm_readout(const PairModel& model, const Mat& rho,
                    double alpha1 = -1.0, double alpha2 = -1.0);

// Tr[Eg rho] alone, without the alternating-flip subtraction
double povm_bright(const PairModel& model, const Mat& rho, double alpha1 = -1.0,
                   double alpha2 = -1.0);

// weighted charge-sector average; signals ordered like the weights
double charge_mixture_signal(const std::array<double, 4>& signals,
                             const ChargeMixture& mixture);

// multiplicative phenomenological coherence factor exp(-t (1/T2a + 1/T2b)/2)
double coherence_decay(double t_us, const std::array<double, 2>& t2_us);
double apply_decoherence(double value, double t_us,
                         const std::array<double, 2>& t2_us);

// single-NV electron density in the eigenlevel order (+1-like, g, -1-like)
Mat spin_init_state(double f_init);

// 81-dim product state: per-NV electron via spin_init_state, nuclear
// maximally mixed or polarized into mI = 0
Mat initial_state(const PairModel& model, double f_init1 = 1.0,
                  double f_init2 = 1.0, bool polarized_nuclear = false);

// pure initial columns spanning the nuclear mixture: electron ground on both
// NVs, one column per populated nuclear basis state (9, or 1 if polarized)
Mat initial_columns(const PairModel& model, bool polarized_nuclear = false);

// electron-pair density from propagated pure columns, nuclear traced out
Mat electron_density_from_columns(const Mat& columns);

}  // namespace nvreg
