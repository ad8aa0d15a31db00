#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace nvreg {

// Field geometry shared by a pair of NV axes. Angles in degrees, field in
// Gauss, frequencies in cyclic MHz. phi is the azimuth of the field in the
// frame of the NV whose theta is theta1; its sign is not observable from
// ODMR alone.
struct FieldGeometry {
  double b_mag = 0.0;
  double omega_e = 0.0;  // |gamma_e| * b_mag
  double theta1 = 0.0;
  double theta2 = 0.0;
  double phi = 0.0;
  double beta = 70.53;
};

// Result of inverting one ODMR transition pair.
struct OdmrSolution {
  double omega_e = 0.0;   // cyclic MHz
  double theta = 0.0;     // degrees, branch in [0, 90]
  double theta_alt = 0.0; // mirror branch 180 - theta
  bool refined = false;   // closed form disagreed with the eigensolver and
                          // the numeric root was kept
};

struct AzimuthSolution {
  double phi = 0.0;           // degrees, non-negative branch in [0, 180]
  bool sign_ambiguous = true; // -phi satisfies the same angle triple
};

struct negative_radicand_error : std::domain_error {
  double radicand;
  explicit negative_radicand_error(double r)
      : std::domain_error("unphysical transition pair: omega_e^2 = " +
                          std::to_string(r) + " MHz^2"),
        radicand(r) {}
};

// Invert a transition pair (nu1 < nu2, cyclic MHz) to the Zeeman frequency
// and polar angle of the field in the NV frame. Closed forms are polished
// against the forward eigensolver; on disagreement above 0.1 MHz the numeric
// root wins and `refined` is set. The azimuth only matters for e != 0.
OdmrSolution solve_field_from_odmr(double nu1, double nu2, double d,
                                   double e = 0.0, double phi_deg = 0.0);

// Both qubit transition frequencies (lower, upper) of the electron triplet
// d*Sz^2 + e*(Sx^2 - Sy^2) + omega_e * n.S with n at polar angle theta and
// azimuth phi, as differences from the lowest eigenvalue.
std::pair<double, double> forward_transitions(double omega_e, double theta_deg,
                                              double phi_deg, double d,
                                              double e);

// Azimuth of the field about the axis of the NV seen at polar angle theta,
// given the polar angle theta_b of the same field in the other NV frame and
// the angle beta between the two axes: cos(theta_b) =
// cos(phi) sin(theta) sin(beta) + cos(theta) cos(beta).
AzimuthSolution solve_second_angle(double theta_deg, double theta_b_deg,
                                   double beta_deg);

// Largest inter-NV distance (nm) compatible with a dipolar coupling of
// nu_dip cyclic MHz, taking the angular factor at its extremal value 2.
double distance_bound(double nu_dip_mhz);

}  // namespace nvreg
