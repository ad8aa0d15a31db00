#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "nvreg/algebra.hpp"
#include "nvreg/propagation.hpp"

namespace nvreg {

// Pauli string on 1 or 2 qubits with an i^phase prefactor
struct PauliString {
  int n_qubits = 1;
  std::array<uint8_t, 2> op{0, 0};  // 0 I, 1 X, 2 Y, 3 Z
  uint8_t phase = 0;                // exponent of i, mod 4
};

PauliString pauli_mul(const PauliString& a, const PauliString& b);
Mat pauli_matrix(const PauliString& p);

// Clifford element as the images of the generators X_j, Z_j under
// conjugation (stabilizer tableau), plus a cached unitary
struct CliffordElement {
  int n_qubits = 1;
  std::array<PauliString, 4> images{};  // X1, Z1, X2, Z2
  Mat unitary;

  // exact integer encoding of the tableau; unique per element
  uint32_t key() const;
};

// image of an arbitrary Pauli string under the element's conjugation map
PauliString clifford_act(const CliffordElement& c, const PauliString& p);

CliffordElement identity_clifford(int n_qubits);

// element representing "apply b, then a"; unitary is a.unitary * b.unitary
CliffordElement compose(const CliffordElement& a, const CliffordElement& b);

CliffordElement inverse_element(const CliffordElement& a);

// recover the tableau of a unitary; throws std::invalid_argument when the
// conjugated generators are not (signed) Pauli strings
CliffordElement tableau_from_unitary(const Mat& u);

// the full Clifford group (24 or 11520 elements), sorted by key
const std::vector<CliffordElement>& clifford_group(int n_qubits);

// uniform draw; depends only on the rng state
CliffordElement sample_clifford(int n_qubits, std::mt19937_64& rng);

// one pulse from the native gate set; entangling gates ignore the
// single-qubit fields
struct NativeGate {
  int qubit = 1;  // 1 or 2; 0 for the entangling gate
  PulseKind kind = PulseKind::pi;
  PulsePhase phase = PulsePhase::x;
  bool entangling = false;
};

// entangling primitive in the computational basis (00, 01, 10, 11):
// diag(i, 1, 1, i), the zz quarter turn the native two-qubit pulse
// train realizes
Mat sqrt_zz_unitary();

// controlled-not (control qubit 1) as the native 8-pulse train
const std::vector<NativeGate>& cnot_pulse_train();

Mat native_gate_unitary(const NativeGate& g, int n_qubits);
Mat native_word_unitary(const std::vector<NativeGate>& word, int n_qubits);

// native pulse synthesis: minimal table for single-qubit elements,
// entangling-class canonical form for two-qubit elements; the composed
// word is verified against the element's unitary (1e-10)
std::vector<NativeGate> decompose_clifford(const CliffordElement& c);

// compose maximal same-qubit pulse runs and re-express each through the
// minimal table when that is strictly shorter
std::vector<NativeGate> merge_single_qubit_runs(
    const std::vector<NativeGate>& word, int n_qubits);

struct GpcStats {
  double gpc_1q = 0;  // mean single-qubit pulses per Clifford
  double gpc_2q = 0;  // mean entangling gates per Clifford
  long samples = 0;
};

GpcStats gate_counts(int n_qubits, long n_samples, uint64_t seed);

}  // namespace nvreg
