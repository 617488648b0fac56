#pragma once

// Binary 1D MERA with open boundaries.
//
// Layer tau (1-based, tau = 1 is closest to the physical qubits) acts on
// m = n / 2^(tau-1) layer-local sites. Local site s of layer tau is physical
// qubit s * 2^(tau-1). Disentangler j acts on local (2j, 2j+1), isometry j on
// (2j-1, 2j) with its ancilla on the left site 2j-1. The top gate acts on the
// two sites left after the last layer (physical n/2 and n).
//
// Gates are stored as generative 4x4 unitaries: the state is
//   D_1 W_1 ... D_{K-1} W_{K-1} T |0...0>
// with every isometry and the top gate fed |0> on their ancilla inputs.

#include <string>
#include <vector>

#include "meralearn/numerics.hpp"

namespace mera {

enum class GateKind { disentangler, isometry, top };

const char* gate_kind_name(GateKind kind);

struct Layer {
  std::vector<Matrix4c> disentanglers;
  std::vector<Matrix4c> isometries;
};

struct MeraCircuit {
  int n = 0;
  int chi = 2;
  std::vector<Layer> layers;  ///< layers[tau - 1]
  Matrix4c top = Matrix4c::Identity();
};

/// Coordinates of one gate plus the physical qubits it acts on.
struct GatePlacement {
  GateKind kind;
  int layer;   ///< top gate uses depth + 1
  int block;   ///< 1-based within the layer
  int site_a;  ///< physical, first (most significant) qubit of the gate basis
  int site_b;
};

/// Number of renormalization layers, K - 1 for n = 2^K.
int depth(int n);
/// Local width of layer tau.
int layer_width(int n, int tau);
/// Physical qubit of local site s in layer tau. tau = depth + 1 addresses the top sites.
int physical_site(int tau, int s);
int gate_count(int n);

/// All gates in generation order (top first, then per layer isometries, then disentanglers).
std::vector<GatePlacement> placements(int n);

const Matrix4c& gate(const MeraCircuit& c, const GatePlacement& p);
Matrix4c& gate(MeraCircuit& c, const GatePlacement& p);

/// Throws InvalidArgument unless 4 <= n <= 64 and n is a power of two.
void require_supported_size(int n);

MeraCircuit random_mera(int n, Rng& rng);
MeraCircuit identity_mera(int n);

struct Violation {
  std::string kind;  ///< "layout", "unitarity", "chi", "size"
  int layer = 0;
  int block = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const MeraCircuit& c, double unitary_tol = default_tolerances().unitary);

/// Maximum entry-wise deviation between two circuits of identical layout.
double max_deviation(const MeraCircuit& a, const MeraCircuit& b);

}  // namespace mera
