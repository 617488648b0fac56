#pragma once

// Learning without touching the state: block states of the partially
// disentangled system are inferred from Pauli expectations on the original
// state, pushed through the already learned gates.
//
// A VirtualCircuit records the disentangling gates and ancilla projections in
// application order. Ascending maps a physical operator O to
//   A(O) = <0_anc| G O G^dag |0_anc>,
// which satisfies Tr[rho_G A(O)] = Tr[rho_0 O] whenever the projected
// ancillas are exactly |0> in G rho_0 G^dag.

#include <cstdint>
#include <memory>
#include <set>
#include <vector>

#include "meralearn/learner.hpp"

namespace mera {

inline constexpr int kDenseAscendLimit = 10;

struct DenseOperator {
  std::vector<int> sites;  ///< increasing
  ComplexMatrix matrix;    ///< first site most significant
};

DenseOperator to_dense(const PauliString& p);

class VirtualCircuit {
 public:
  struct Event {
    bool projection = false;
    Matrix4c gate = Matrix4c::Identity();
    int a = 0;
    int b = 0;  ///< unused for projections
  };

  explicit VirtualCircuit(int n = 0) : n_(n) {}

  int n() const { return n_; }
  void add_gate(const Matrix4c& g, int a, int b);
  void add_projection(int site);
  /// Events recorded after this call form the current partial layer.
  void mark_layer_start() { layer_start_ = events_.size(); }

  const std::vector<Event>& events() const { return events_; }
  std::size_t layer_start() const { return layer_start_; }
  const std::set<int>& projected() const { return projected_; }

  /// Sites reached from `sites` through events [from, to), projected ancillas included.
  std::set<int> cone(const std::set<int>& sites, std::size_t from, std::size_t to) const;
  /// Same over all events, with projected ancillas removed.
  std::set<int> support_after(const std::set<int>& sites) const;

  DenseOperator ascend(const DenseOperator& o, int max_sites = kDenseAscendLimit) const;

 private:
  int n_;
  std::vector<Event> events_;
  std::set<int> projected_;
  std::size_t layer_start_ = 0;
};

/// Disentangling circuit of layers 1..tau of a generative circuit
/// (adjoint gates, disentanglers before isometries, ancillas projected).
VirtualCircuit inverse_layers(const MeraCircuit& c, int tau);

/// A(O) through a single layer tau of `c`; O lives on the layer's input sites.
DenseOperator ascend_observable(const DenseOperator& o, const MeraCircuit& c, int tau);

/// Sites of the renormalised state after tau layers: physical s * 2^tau.
std::vector<int> renormalized_sites(int n, int tau);

/// Physical sites whose ascended operators can act non-trivially on `block`
/// (sites of the state after `tau` layers).
std::set<int> causal_shadow(const std::vector<int>& block, int tau, const MeraCircuit& c);

struct ObservableSetOptions {
  int max_weight = 4;
  long candidate_budget = 50000;
  double cutoff = 1e-8;    ///< smallest accepted Gram eigenvalue
  double novelty = 1e-6;   ///< relative residual norm^2 needed to accept a candidate
  /// Candidates are ascended in chunks of this size. After the first chunk
  /// only operators with residual norm^2 >= good_residual are accepted
  /// (Pauli strings have norm 1); the bar halves with every further chunk.
  std::size_t pool_chunk = 256;
  double good_residual = 0.05;
};

struct AscendedObservableSet {
  std::vector<int> block;   ///< sites whose state is wanted
  std::vector<int> region;  ///< sites the ascended operators act on (contains block)
  std::vector<PauliString> observables;   ///< measured physical strings, identity first
  std::vector<ComplexMatrix> ascended;    ///< A(O_j) on region
  std::vector<double> gram_eigenvalues;   ///< descending
  Eigen::MatrixXd mixing;                 ///< Z, row i = eigenvector i of the Gram matrix
  std::vector<double> conditioning;       ///< 1 / lambda_i
  std::vector<ComplexMatrix> orthonormal; ///< R_i
  long candidates_tried = 0;
};

/// Pivoted selection among `candidates`: the identity string first, then
/// repeatedly the candidate whose ascended operator has the largest part
/// outside the span of those kept so far. Stops
/// at `target_rank` operators, or, with target_rank = 0, as soon as the span
/// contains every operator of the form X_block (x) I on the region. Gram
/// entries are Tr[A_i A_j] / 2^|region|. Throws RankDeficiencyError when the
/// candidates run out first.
AscendedObservableSet build_observable_set(const VirtualCircuit& vc, const std::vector<int>& block,
                                           const std::vector<int>& region, const std::vector<PauliString>& candidates,
                                           long target_rank, const ObservableSetOptions& opts = {});

/// Identity followed by random Pauli strings of weight <= max_weight on the
/// sites feeding `region`.
AscendedObservableSet build_observable_set(const VirtualCircuit& vc, const std::vector<int>& block,
                                           const std::vector<int>& region, long target_rank, Rng& rng,
                                           const ObservableSetOptions& opts = {});

/// Identity followed by every Pauli string of weight <= max_weight on `sites`, shuffled.
std::vector<PauliString> candidate_strings(const std::vector<int>& sites, int max_weight, long budget, Rng& rng);

/// Block at layer tau of a known circuit (region = block, target rank 4^|block|).
AscendedObservableSet build_observable_set(const std::vector<int>& block, int tau, const MeraCircuit& c, Rng& rng,
                                           const ObservableSetOptions& opts = {});

/// Physical sites whose ascended support stays inside `region`.
std::vector<int> feeding_sites(const VirtualCircuit& vc, const std::vector<int>& region);

/// Region to reconstruct so that `block` can be traced out of it: block plus
/// every site entangled with it by the current partial layer.
std::vector<int> extended_region(const VirtualCircuit& vc, const std::vector<int>& block);

struct IndirectEstimate {
  BlockDensityMatrix rho;         ///< on the block, PSD-projected
  ComplexMatrix rho_region;       ///< on the region, before projection
  std::vector<double> o;          ///< measured expectations
  std::vector<double> r;          ///< r_i = lambda_i^-1/2 sum_j Z_ij o_j
  std::vector<double> variance_factor;  ///< Var(r_i) / Var(o) for equal-variance o_j, = 1 / lambda_i
};

IndirectEstimate estimate_block_indirect(const StateVector& rho0, const AscendedObservableSet& set, TomoMode mode,
                                         long shots, Rng& rng);

struct ConditioningOverhead {
  std::vector<double> multipliers;  ///< 1 / lambda_i
  double worst = 1.0;
};

ConditioningOverhead conditioning_overhead(const AscendedObservableSet& set);

/// Product of the worst multipliers of several stages.
double total_multiplier(const std::vector<ConditioningOverhead>& stages);

struct BlockConditioning {
  int layer = 0;
  std::vector<int> block;
  std::vector<int> region;
  double min_eigenvalue = 0.0;
  double worst_multiplier = 1.0;
  long candidates_tried = 0;
};

struct IndirectOptions {
  LearnerOptions learner;
  TomoMode mode = TomoMode::exact;
  long shots = 1000;  ///< per observable in sampled mode
  ObservableSetOptions observables;
};

/// Environment for the learner that only measures the untouched state.
class IndirectEnvironment : public LearningEnvironment {
 public:
  IndirectEnvironment(std::shared_ptr<const StateVector> state, IndirectOptions opts);
  std::unique_ptr<LearningEnvironment> clone() const override;
  int n() const override { return state_->n(); }
  void mark_layer_start() override;
  ComplexMatrix block_state(const std::vector<int>& sites, Rng& rng) override;
  void apply(const Matrix4c& g, int a, int b) override { circuit_.add_gate(g, a, b); }
  double discard_ancilla(int site) override;

  const VirtualCircuit& circuit() const { return circuit_; }
  const std::vector<BlockConditioning>& conditioning() const { return *log_; }

 private:
  std::shared_ptr<const StateVector> state_;
  IndirectOptions opts_;
  VirtualCircuit circuit_;
  int layer_ = 0;
  std::shared_ptr<std::vector<BlockConditioning>> log_;
};

/// Diagnostics of a measurement-only run. There is deliberately no
/// certified bound: nothing is post-selected.
struct IndirectDiagnostics {
  std::vector<StepRecord> steps;
  std::vector<BlockConditioning> conditioning;
  std::vector<double> layer_worst_multiplier;  ///< per layer (top last)
  double total_multiplier = 1.0;
  double oracle_infidelity = 0.0;
  int sweeps_used = 0;
};

struct IndirectResult {
  MeraCircuit circuit;
  IndirectDiagnostics diagnostics;
};

IndirectResult learn_mera_indirect(const StateVector& state, const IndirectOptions& opts);

}  // namespace mera
