#pragma once

// Statevector simulator standing in for the experiment.
//
// Sites are 1-based. Amplitude index bit (s - 1) holds qubit s, so site 1
// varies fastest. Operators on a site list use the numerics-core convention
// (first listed site most significant).

#include <utility>
#include <vector>

#include "meralearn/mera.hpp"
#include "meralearn/pauli.hpp"

namespace mera {

inline constexpr int kMaxSimulatedQubits = 26;

class StateVector {
 public:
  StateVector() = default;
  /// |0...0> on n qubits.
  explicit StateVector(int n);
  /// Takes ownership of amplitudes; size must be 2^n and the norm 1 within 1e-10.
  StateVector(int n, ComplexVector amplitudes);

  static StateVector random(int n, Rng& rng);

  int n() const { return n_; }
  const ComplexVector& amplitudes() const { return amps_; }
  Complex amplitude(std::uint64_t index) const { return amps_(static_cast<Eigen::Index>(index)); }
  double norm() const { return amps_.norm(); }

  /// Raw access for gate kernels. Callers keep the vector normalised.
  ComplexVector& mutable_amplitudes() { return amps_; }

 private:
  int n_ = 0;
  ComplexVector amps_;
};

struct BlockDensityMatrix {
  std::vector<int> sites;
  ComplexMatrix matrix;
};

void require_site(const StateVector& s, int site, const char* who);

/// Apply a 4x4 operator on (a, b); a is the most significant qubit of the gate basis.
/// Unitarity is the caller's responsibility; `apply_two_qubit` checks it.
void apply_two_qubit_unchecked(StateVector& state, const Matrix4c& u, int a, int b);
void apply_two_qubit(StateVector& state, const Matrix4c& u, int a, int b);
void apply_single_qubit(StateVector& state, const Matrix2c& u, int site);

/// Statevector generated by the circuit from |0...0>.
StateVector generate_state(const MeraCircuit& circuit);

/// Reduced density matrix of `sites` (distinct, at most 4, any order).
BlockDensityMatrix reduced_density(const StateVector& state, const std::vector<int>& sites);

/// Same as reduced_density without the block-size limit (tests and oracles).
ComplexMatrix reduced_density_unbounded(const StateVector& state, const std::vector<int>& sites);

/// Probability that `site` reads |0>.
double probability_zero(const StateVector& state, int site);

/// Project `site` onto |0>, renormalise, return the acceptance probability.
/// Throws PostSelectionError when the probability is below 1e-14.
double measure_postselect_zero(StateVector& state, int site);

double pauli_expectation(const StateVector& state, const PauliString& p);

/// Mean of `shots` +-1 outcomes drawn from the eigenvalue distribution of p.
double sample_expectation(const StateVector& state, const PauliString& p, long shots, Rng& rng);

/// <a|b>
Complex inner_product(const StateVector& a, const StateVector& b);

/// 1 - |<a|b>|^2
double infidelity(const StateVector& a, const StateVector& b);

}  // namespace mera
