#pragma once

namespace nvreg {

// gyromagnetic ratios, cyclic MHz per Gauss
inline constexpr double gamma_e_mhz_g = 2.8024;
inline constexpr double gamma_n14_mhz_g = 3.077e-4;

// 14N quadrupole and hyperfine tensor defaults, cyclic MHz
inline constexpr double q_14n_mhz = -4.945;
inline constexpr double a_perp_mhz = -2.62;
inline constexpr double a_par_mhz = -2.162;

// angle between two tetrahedral NV symmetry axes, degrees
inline constexpr double beta_tetra_deg = 70.53;

// excited-state zero-field splitting as a fraction of the ground-state one
inline constexpr double zfs_excited_ratio = 1.42 / 2.87;

}  // namespace nvreg
