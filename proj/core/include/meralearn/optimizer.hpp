#pragma once

// Disentangler search over two-qubit unitaries.
//
// Block convention: rho123 is an 8x8 density matrix on qubits (1, 2, 3).
// traced_side = right: U acts on (2, 3), qubit 3 is traced, leaving rho12[U].
// traced_side = left:  U acts on (1, 2), qubit 1 is traced, leaving rho23[U].

#include <array>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "meralearn/numerics.hpp"

namespace mera {

enum class ObjectiveKind { rank_tail, char_poly_b, modified };
enum class TracedSide { left, right };

const char* objective_kind_name(ObjectiveKind kind);

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::rank_tail;
  TracedSide traced_side = TracedSide::right;
  double epsilon_weight = 0.0;  ///< only for ObjectiveKind::modified
};

/// Conjugation-direction coefficient.
///   polak_ribiere_plus: beta = max(0, G.(G - G_prev) / (G_prev.G_prev))
///   literal:            beta = max(0, G.(D_prev - G) / (D_prev.D_prev)), D_prev the previous direction
enum class BetaFormula { polak_ribiere_plus, literal };

struct LineSearchOptions {
  double t_max = std::numbers::pi;
  double t_initial = 1e-3;  ///< first geometric probe; also where shrinking starts
  int grid_points = 64;     ///< uniform probes on (0, t_max]
  double rel_width = 1e-4;  ///< golden-section stop, relative to the bracket midpoint
  double t_min = 1e-12;     ///< smallest step tried while shrinking
};

struct OptimizerOptions {
  double fd_step = 1e-6;
  bool central_differences = false;
  int max_iters = 500;
  double f_tol = 1e-12;
  double stall_tol = 1e-9;
  int stall_window = 5;
  int restarts = 3;
  double accept_tol = 1e-10;        ///< a restart reaching this ends the restart loop
  double failure_threshold = 1e-6;  ///< best f above this flags the result as failed
  BetaFormula beta = BetaFormula::polak_ribiere_plus;
  LineSearchOptions line_search;
};

struct IterationRecord {
  double f = 0.0;
  double grad_norm = 0.0;
  double t_opt = 0.0;
};

struct OptimizationTrace {
  std::vector<std::vector<IterationRecord>> restarts;  ///< entry 0 is the starting point
  int winner = 0;
  long evaluations = 0;
};

struct OptimizationResult {
  Matrix4c u = Matrix4c::Identity();
  double f_min = 0.0;
  bool failed = false;
  OptimizationTrace trace;
};

using UnitaryObjective = std::function<double(const Matrix4c&)>;
using Gradient = std::array<double, 16>;

/// The 16 two-qubit Pauli products sigma_mu (x) sigma_nu, index 4 mu + nu.
const std::array<Matrix4c, 16>& two_qubit_paulis();

/// rho12[U] (right) or rho23[U] (left) as described above, normalised to unit trace.
Matrix4c reduced_pair(const Matrix4c& u, const ComplexMatrix& rho123, TracedSide side);

/// Sum of the two smallest eigenvalues of the reduced pair.
double objective_rank_tail(const Matrix4c& u, const ComplexMatrix& rho123, TracedSide side);
/// Third elementary symmetric polynomial of the reduced pair spectrum, from traces only.
double objective_char_poly_b(const Matrix4c& u, const ComplexMatrix& rho123, TracedSide side);
/// rank_tail + epsilon_weight * (second largest eigenvalue).
double objective_modified(const Matrix4c& u, const ComplexMatrix& rho123, TracedSide side, double epsilon_weight);
double evaluate_objective(const ObjectiveSpec& spec, const Matrix4c& u, const ComplexMatrix& rho123);

/// Joint objective on a four-qubit block (1, 2, 3, 4) with U on (2, 3): sum of
/// the rank tails of the pairs (1, 2) and (3, 4).
double objective_joint_pair(const Matrix4c& u, const ComplexMatrix& rho1234);

/// b = (p1^3 - 3 p1 p2 + 2 p3) / 6 with p_k = Tr A^k.
double char_poly_b(const Matrix4c& a);

/// Forward differences G_{mu nu} = [f(I + i eps sigma_mu sigma_nu) - f(I)] / eps
/// (central differences when requested). Component (I, I) is zero.
Gradient gradient_fd(const UnitaryObjective& f_centered, double fd_step, bool central = false);
Gradient gradient_fd(const ObjectiveSpec& spec, const ComplexMatrix& rho_centered, double fd_step,
                     bool central = false);

/// Minimise phi on [0, t_max] given phi(0) = f0. Returns 0 when no descent is found.
double line_search(const std::function<double(double)>& phi, double f0, const LineSearchOptions& opts,
                   long* evaluations = nullptr);

/// Line search along exp(-i t sum D_{mu nu} sigma_mu sigma_nu) with D normalised to unit length.
double line_search(const ObjectiveSpec& spec, const ComplexMatrix& rho_k, const Gradient& direction,
                   const LineSearchOptions& opts);

/// Hermitian generator sum_k c_k P_k.
Matrix4c generator(const Gradient& coefficients);

OptimizationResult cg_minimize(const UnitaryObjective& f, const OptimizerOptions& opts,
                               const std::optional<Matrix4c>& init, Rng& rng);
OptimizationResult cg_minimize(const ComplexMatrix& rho123, const ObjectiveSpec& spec, const OptimizerOptions& opts,
                               const std::optional<Matrix4c>& init, Rng& rng);

/// Unitary V with V psi_k = e_k for the eigenvectors of rho12 in descending
/// order, so the dominant two-dimensional eigenspace lands on |0> (x) C^2.
Matrix4c extract_isometry(const ComplexMatrix& rho12);

}  // namespace mera
