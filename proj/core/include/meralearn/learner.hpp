#pragma once

// MERA reconstruction with unitary control.
//
// Each layer is learned in alternating passes (LR, RL, LR, ...). A pass
// starts from a fresh copy of the layer-start state, finds one disentangler
// and one isometry per block, applies them and removes the isometry's ancilla.
// The last pass of a layer is kept; its output feeds the next layer. The top
// gate is read off the final two-qubit state. Learned gates are the
// disentangling unitaries; the reconstructed circuit stores their adjoints.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "meralearn/mera.hpp"
#include "meralearn/optimizer.hpp"
#include "meralearn/state.hpp"
#include "meralearn/tomography.hpp"

namespace mera {

enum class Direction { LR, RL };
const char* direction_name(Direction d);

struct StepRecord {
  int layer = 0;  ///< depth + 1 for the two top steps
  int block = 0;  ///< isometry index within the layer (top: 1 and 2)
  Direction direction = Direction::LR;
  int sweep = 0;  ///< 1-based pass index within the layer
  double objective = 0.0;       ///< optimiser objective at the returned gate (eigenvalue tail for isometry-only steps)
  double epsilon_step = 0.0;    ///< (1 - p) / p, so that 1 + epsilon = 1 / p
  double p_accept = 1.0;        ///< exact acceptance probability of the ancilla (NaN when not observable)
  double p_estimate = 1.0;      ///< value used for certification (sampled when acceptance shots are set)
  bool optimizer_failed = false;
  bool injected = false;
};

struct CertificationReport {
  std::vector<StepRecord> steps;    ///< the kept pass of every layer plus the top steps
  std::vector<double> epsilon_cm;   ///< prod_{i<=k} (1 + eps_i) - 1
  double infidelity_bound = 0.0;    ///< 1 - 1 / prod (1 + eps_i)
  int sweeps_used = 0;
};

struct Certification {
  double product = 1.0;  ///< prod (1 + eps_i)
  double infidelity_bound = 0.0;
  double required_step_precision = 0.0;  ///< for the requested target, with m = number of steps
};

/// Per-step residual that keeps the total infidelity below `target` over m steps: (1 - E)^(-1/m) - 1.
double required_step_precision(double target, int m);

/// Recompute the bound from the step records.
Certification certify(const CertificationReport& report, double target = 1e-2);

/// Fills epsilon_cm and infidelity_bound from `steps`.
CertificationReport make_report(std::vector<StepRecord> steps, int sweeps);

/// Deliberate error on learned isometries: V -> exp(-i theta K) V with
/// K = |1><0| (x) B + |0><1| (x) B^dag on (ancilla, partner), B Haar random and
/// sin^2 theta = epsilon. The second top step gets a single-qubit rotation of
/// the same strength. Applied to the first `steps` steps of the kept passes.
struct ErrorInjection {
  double epsilon = 0.0;
  int steps = 0;
  std::uint64_t seed = 0;
};

struct LearnerOptions {
  int sweeps = 3;
  TomographyOptions tomography;
  ObjectiveSpec objective;  ///< traced_side is set per pass
  OptimizerOptions optimizer;
  bool joint_last_block = false;  ///< four-qubit tomography for the last LR block
  long acceptance_shots = 0;      ///< 0: certify with exact acceptance probabilities
  double escalation_threshold = 1e-6;
  ErrorInjection injection;
  std::uint64_t seed = 1;
  bool compute_oracle = true;  ///< report 1 - |<reconstruction|input>|^2
};

/// What the learner needs from the experiment.
class LearningEnvironment {
 public:
  virtual ~LearningEnvironment() = default;
  virtual std::unique_ptr<LearningEnvironment> clone() const = 0;
  virtual int n() const = 0;
  /// Called before the passes of each layer and before the top step.
  virtual void mark_layer_start() {}
  /// Estimated density matrix of 2-4 physical sites (increasing).
  virtual ComplexMatrix block_state(const std::vector<int>& sites, Rng& rng) = 0;
  virtual void apply(const Matrix4c& g, int a, int b) = 0;
  /// Remove an ancilla; returns its |0> probability or NaN if unobservable.
  virtual double discard_ancilla(int site) = 0;
};

/// Statevector laboratory: tomography on the current state, gates applied
/// physically, ancillas measured and post-selected (or left in place).
class ControlEnvironment : public LearningEnvironment {
 public:
  ControlEnvironment(StateVector state, TomographyOptions tomo, bool postselect);
  std::unique_ptr<LearningEnvironment> clone() const override;
  int n() const override { return state_.n(); }
  ComplexMatrix block_state(const std::vector<int>& sites, Rng& rng) override;
  void apply(const Matrix4c& g, int a, int b) override;
  double discard_ancilla(int site) override;
  const StateVector& state() const { return state_; }
  long settings_used() const { return *settings_; }

 private:
  StateVector state_;
  TomographyOptions tomo_;
  bool postselect_;
  std::shared_ptr<long> settings_;
};

struct LayerResult {
  std::vector<Matrix4c> u;  ///< applied disentangling gates, u[j-1] on local (2j, 2j+1)
  std::vector<Matrix4c> v;  ///< applied isometry inverses, v[j-1] on local (2j-1, 2j)
  std::vector<StepRecord> steps;
  std::unique_ptr<LearningEnvironment> env;  ///< environment after the pass
};

/// One pass over layer tau. `init_u` seeds the disentangler searches.
LayerResult learn_layer(const LearningEnvironment& start, int layer, Direction direction,
                        const std::vector<Matrix4c>* init_u, const LearnerOptions& opts, Rng& rng, int sweep = 1);

/// Convenience overload on a statevector with post-selection.
LayerResult learn_layer(const StateVector& state, int layer, Direction direction,
                        const std::vector<Matrix4c>* init_u, const LearnerOptions& opts);

struct EscalationRecommendation {
  int layer = 0;
  int block = 0;
  double epsilon = 0.0;
  std::string message;
};

struct ScheduleResult {
  MeraCircuit circuit;
  std::vector<StepRecord> kept_steps;
  std::vector<StepRecord> history;  ///< every pass, in execution order
  std::vector<EscalationRecommendation> recommendations;
  int sweeps = 0;
};

/// Full layer-by-layer schedule on any environment.
ScheduleResult run_schedule(LearningEnvironment& env, const LearnerOptions& opts);

struct LearnResult {
  MeraCircuit circuit;
  CertificationReport report;
  std::vector<StepRecord> history;
  std::vector<EscalationRecommendation> recommendations;
  std::optional<double> oracle_infidelity;
  long settings_used = 0;
};

LearnResult learn_mera(const StateVector& state, const LearnerOptions& opts);

struct NoPostselectDiagnostics {
  std::vector<StepRecord> steps;  ///< p_accept is the unprojected |0> probability
  std::vector<StepRecord> history;
  double oracle_infidelity = 0.0;
  int sweeps_used = 0;
  long settings_used = 0;
};

struct NoPostselectResult {
  MeraCircuit circuit;
  NoPostselectDiagnostics diagnostics;
};

NoPostselectResult learn_mera_no_postselect(const StateVector& state, const LearnerOptions& opts);

}  // namespace mera
