#pragma once

// Exact overlap of two MERA states by sweeping a boundary tensor from the
// left edge of the doubled (ket + bra) network to the right edge.

#include <cstdint>
#include <vector>

#include "meralearn/mera.hpp"

namespace mera {

struct ContractionStats {
  int max_open_bonds = 0;
  std::uint64_t multiply_adds = 0;  ///< sum over absorptions of |rest| * |shared| * |free|
  int columns = 0;
};

struct OverlapResult {
  Complex value;  ///< <psi_B | psi_A>
  ContractionStats stats;
};

OverlapResult overlap(const MeraCircuit& a, const MeraCircuit& b);

/// |<psi_B|psi_A>|^2
double fidelity(const MeraCircuit& a, const MeraCircuit& b);

struct ExpectationResult {
  Complex value;
  bool hermitian = true;  ///< false when some site operator was not Hermitian
  ContractionStats stats;
};

/// <psi| A_1 (x) ... (x) A_n |psi>; `ops` holds one 2x2 operator per site.
ExpectationResult expectation_product(const MeraCircuit& c, const std::vector<Matrix2c>& ops);

/// 4 log_chi n
int predicted_max_bonds(int n, int chi = 2);

/// Open-bond and cost accounting of the sweep without touching tensor data.
ContractionStats contraction_plan(int n);

}  // namespace mera
