#include "meralearn/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "meralearn/errors.hpp"

namespace mera {

const char* direction_name(Direction d) { return d == Direction::LR ? "LR" : "RL"; }

double required_step_precision(double target, int m) {
  if (!(target > 0.0 && target < 1.0)) throw InvalidArgument("required_step_precision: target must lie in (0, 1)");
  if (m < 1) throw InvalidArgument("required_step_precision: m must be positive");
  return std::pow(1.0 - target, -1.0 / m) - 1.0;
}

Certification certify(const CertificationReport& report, double target) {
  Certification c;
  for (const auto& s : report.steps) c.product *= 1.0 + s.epsilon_step;
  c.infidelity_bound = 1.0 - 1.0 / c.product;
  c.required_step_precision = required_step_precision(target, std::max<int>(1, static_cast<int>(report.steps.size())));
  return c;
}

CertificationReport make_report(std::vector<StepRecord> steps, int sweeps) {
  CertificationReport r;
  r.steps = std::move(steps);
  r.sweeps_used = sweeps;
  double product = 1.0;
  for (const auto& s : r.steps) {
    product *= 1.0 + s.epsilon_step;
    r.epsilon_cm.push_back(product - 1.0);
  }
  r.infidelity_bound = 1.0 - 1.0 / product;
  return r;
}

ControlEnvironment::ControlEnvironment(StateVector state, TomographyOptions tomo, bool postselect)
    : state_(std::move(state)), tomo_(tomo), postselect_(postselect), settings_(std::make_shared<long>(0)) {}

std::unique_ptr<LearningEnvironment> ControlEnvironment::clone() const {
  return std::make_unique<ControlEnvironment>(*this);
}

ComplexMatrix ControlEnvironment::block_state(const std::vector<int>& sites, Rng& rng) {
  if (sites.size() == 3) *settings_ += 27;
  return estimate_block(state_, sites, tomo_, rng).rho_hat.matrix;
}

void ControlEnvironment::apply(const Matrix4c& g, int a, int b) { apply_two_qubit(state_, g, a, b); }

double ControlEnvironment::discard_ancilla(int site) {
  if (postselect_) return measure_postselect_zero(state_, site);
  return probability_zero(state_, site);
}

namespace {

class Injector {
 public:
  explicit Injector(const ErrorInjection& cfg) : cfg_(cfg), rng_(cfg.seed) {
    if (cfg.epsilon < 0.0 || cfg.epsilon >= 1.0) throw InvalidArgument("error injection: epsilon must lie in [0, 1)");
    theta_ = std::asin(std::sqrt(cfg.epsilon));
  }

  bool active() const { return cfg_.epsilon > 0.0 && count_ < cfg_.steps; }

  // exp(-i theta K) with K^2 = I
  Matrix4c pair_error() {
    const ComplexMatrix b = haar_unitary(2, rng_);
    Matrix4c k = Matrix4c::Zero();
    k.block<2, 2>(0, 2) = b.adjoint();
    k.block<2, 2>(2, 0) = b;
    ++count_;
    return std::cos(theta_) * Matrix4c::Identity() - Complex(0.0, std::sin(theta_)) * k;
  }

  // rotation on the second qubit of a pair
  Matrix4c second_qubit_error() {
    Matrix2c y;
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    const Matrix2c r = std::cos(theta_) * Matrix2c::Identity() - Complex(0.0, std::sin(theta_)) * y;
    ++count_;
    return kron(Matrix2c::Identity(), r);
  }

 private:
  ErrorInjection cfg_;
  Rng rng_;
  double theta_ = 0.0;
  int count_ = 0;
};

double eigen_tail(const ComplexMatrix& rho2) {
  const auto ev = eigvals_hermitian(rho2);
  return ev[2] + ev[3];
}

StepRecord make_step(int layer, int block, Direction dir, int sweep, double objective, double p, bool failed,
                     bool injected, long acceptance_shots, Rng& rng) {
  StepRecord s;
  s.layer = layer;
  s.block = block;
  s.direction = dir;
  s.sweep = sweep;
  s.objective = objective;
  s.p_accept = p;
  s.optimizer_failed = failed;
  s.injected = injected;
  double est = p;
  if (acceptance_shots > 0 && std::isfinite(p)) {
    std::binomial_distribution<long> draw(acceptance_shots, std::clamp(p, 0.0, 1.0));
    est = static_cast<double>(draw(rng)) / static_cast<double>(acceptance_shots);
  }
  s.p_estimate = est;
  if (!std::isfinite(est)) s.epsilon_step = std::numeric_limits<double>::quiet_NaN();
  else if (est <= 0.0) s.epsilon_step = std::numeric_limits<double>::infinity();
  else s.epsilon_step = (1.0 - est) / est;
  return s;
}

double discard(LearningEnvironment& env, int site, int layer, int block) {
  try {
    return env.discard_ancilla(site);
  } catch (const PostSelectionError& e) {
    std::ostringstream os;
    os << e.what() << " (layer " << layer << ", block " << block << ")";
    throw PostSelectionError(os.str(), layer, block);
  }
}

LayerResult run_pass(const LearningEnvironment& start, int tau, Direction dir, const std::vector<Matrix4c>* init_u,
                     const LearnerOptions& opts, Rng& rng, int sweep, Injector* inj) {
  const int n = start.n();
  if (tau < 1 || tau > depth(n)) throw InvalidArgument("learn_layer: layer index out of range");
  const int m = layer_width(n, tau);
  auto site = [tau](int s) { return physical_site(tau, s); };
  const int nd = m / 2 - 1;
  if (init_u && static_cast<int>(init_u->size()) != nd)
    throw InvalidArgument("learn_layer: initial disentangler list has the wrong length");

  LayerResult out;
  out.env = start.clone();
  out.u.assign(static_cast<std::size_t>(nd), Matrix4c::Identity());
  out.v.assign(static_cast<std::size_t>(m / 2), Matrix4c::Identity());
  auto& env = *out.env;

  auto maybe_inject = [&](Matrix4c& v) {
    if (inj && inj->active()) {
      v = inj->pair_error() * v;
      return true;
    }
    return false;
  };
  auto init_for = [&](int j) -> std::optional<Matrix4c> {
    if (init_u) return (*init_u)[j - 1];
    return std::nullopt;
  };

  auto finish_pair = [&](int iso, int anc_local, int partner_local) {
    // the last isometry of a pass has no disentangler left to find
    const int a = site(anc_local), b = site(partner_local);
    const ComplexMatrix rho2 = env.block_state({std::min(a, b), std::max(a, b)}, rng);
    Matrix4c v = extract_isometry(rho2);
    const bool injected = maybe_inject(v);
    env.apply(v, a, b);
    const double p = discard(env, a, tau, iso);
    out.v[iso - 1] = v;
    out.steps.push_back(
        make_step(tau, iso, dir, sweep, eigen_tail(rho2), p, false, injected, opts.acceptance_shots, rng));
  };

  ObjectiveSpec spec = opts.objective;
  if (dir == Direction::LR) {
    spec.traced_side = TracedSide::right;
    for (int k = 1; k <= nd; ++k) {
      OptimizationResult res;
      Matrix4c rho12;
      if (opts.joint_last_block && k == nd && nd >= 2) {
        const ComplexMatrix rho4 = env.block_state({site(2 * k - 1), site(2 * k), site(2 * k + 1), site(2 * k + 2)}, rng);
        res = cg_minimize([&](const Matrix4c& u) { return objective_joint_pair(u, rho4); }, opts.optimizer,
                          init_for(k), rng);
        const ComplexMatrix m4 = kron(kron(ComplexMatrix::Identity(2, 2), res.u), ComplexMatrix::Identity(2, 2));
        const ComplexMatrix s = m4 * rho4 * m4.adjoint();
        const std::array<int, 2> keep{1, 2};
        rho12 = partial_trace(0.5 * (s + s.adjoint()), 4, keep);
      } else {
        const ComplexMatrix rho3 = env.block_state({site(2 * k - 1), site(2 * k), site(2 * k + 1)}, rng);
        res = cg_minimize(rho3, spec, opts.optimizer, init_for(k), rng);
        rho12 = reduced_pair(res.u, rho3, TracedSide::right);
      }
      Matrix4c v = extract_isometry(rho12);
      const bool injected = maybe_inject(v);
      env.apply(res.u, site(2 * k), site(2 * k + 1));
      env.apply(v, site(2 * k - 1), site(2 * k));
      const double p = discard(env, site(2 * k - 1), tau, k);
      out.u[k - 1] = res.u;
      out.v[k - 1] = v;
      out.steps.push_back(
          make_step(tau, k, dir, sweep, res.f_min, p, res.failed, injected, opts.acceptance_shots, rng));
    }
    finish_pair(m / 2, m - 1, m);
  } else {
    spec.traced_side = TracedSide::left;
    for (int j = m / 2; j >= 2; --j) {
      const ComplexMatrix rho3 = env.block_state({site(2 * j - 2), site(2 * j - 1), site(2 * j)}, rng);
      const auto res = cg_minimize(rho3, spec, opts.optimizer, init_for(j - 1), rng);
      const Matrix4c rho23 = reduced_pair(res.u, rho3, TracedSide::left);
      Matrix4c v = extract_isometry(rho23);
      const bool injected = maybe_inject(v);
      env.apply(res.u, site(2 * j - 2), site(2 * j - 1));
      env.apply(v, site(2 * j - 1), site(2 * j));
      const double p = discard(env, site(2 * j - 1), tau, j);
      out.u[j - 2] = res.u;
      out.v[j - 1] = v;
      out.steps.push_back(
          make_step(tau, j, dir, sweep, res.f_min, p, res.failed, injected, opts.acceptance_shots, rng));
    }
    finish_pair(1, 1, 2);
  }
  return out;
}

}  // namespace

LayerResult learn_layer(const LearningEnvironment& start, int layer, Direction direction,
                        const std::vector<Matrix4c>* init_u, const LearnerOptions& opts, Rng& rng, int sweep) {
  return run_pass(start, layer, direction, init_u, opts, rng, sweep, nullptr);
}

LayerResult learn_layer(const StateVector& state, int layer, Direction direction,
                        const std::vector<Matrix4c>* init_u, const LearnerOptions& opts) {
  ControlEnvironment env(state, opts.tomography, true);
  Rng rng(opts.seed);
  return run_pass(env, layer, direction, init_u, opts, rng, 1, nullptr);
}

ScheduleResult run_schedule(LearningEnvironment& env, const LearnerOptions& opts) {
  if (opts.sweeps < 1) throw InvalidArgument("learner: sweeps must be at least 1");
  const int n = env.n();
  require_supported_size(n);
  const int K = depth(n);
  Rng rng(opts.seed);
  Injector injector(opts.injection);

  ScheduleResult out;
  out.circuit = identity_mera(n);
  out.sweeps = opts.sweeps;
  std::unique_ptr<LearningEnvironment> current = env.clone();

  for (int tau = 1; tau <= K; ++tau) {
    current->mark_layer_start();
    std::optional<LayerResult> pass;
    for (int s = 1; s <= opts.sweeps; ++s) {
      const Direction dir = (s % 2 == 1) ? Direction::LR : Direction::RL;
      const bool kept = s == opts.sweeps;
      const std::vector<Matrix4c>* init = pass ? &pass->u : nullptr;
      LayerResult next = run_pass(*current, tau, dir, init, opts, rng, s, kept ? &injector : nullptr);
      out.history.insert(out.history.end(), next.steps.begin(), next.steps.end());
      pass = std::move(next);
    }
    auto& layer = out.circuit.layers[tau - 1];
    for (std::size_t j = 0; j < pass->u.size(); ++j) layer.disentanglers[j] = pass->u[j].adjoint();
    for (std::size_t j = 0; j < pass->v.size(); ++j) layer.isometries[j] = pass->v[j].adjoint();
    out.kept_steps.insert(out.kept_steps.end(), pass->steps.begin(), pass->steps.end());
    current = std::move(pass->env);
  }

  // top: two remaining sites, dominant eigenvector onto |00>
  current->mark_layer_start();
  const int a = physical_site(K + 1, 1), b = physical_site(K + 1, 2);
  const ComplexMatrix rho2 = current->block_state({a, b}, rng);
  const auto eig = eig_hermitian(rho2);
  Matrix4c v = eig.vectors.adjoint();
  bool injected1 = false, injected2 = false;
  if (injector.active()) {
    v = injector.pair_error() * v;
    injected1 = true;
  }
  current->apply(v, a, b);
  const double p1 = discard(*current, a, K + 1, 1);
  Matrix4c r = Matrix4c::Identity();
  if (injector.active()) {
    r = injector.second_qubit_error();
    injected2 = true;
    current->apply(r, a, b);
  }
  const double p2 = discard(*current, b, K + 1, 2);
  out.circuit.top = (r * v).adjoint();

  const double lam12 = eig.values[0] + eig.values[1];
  const double top_tail = eig.values[2] + eig.values[3];
  const double top_second = lam12 > 0.0 ? eig.values[1] / lam12 : 0.0;
  const StepRecord s1 =
      make_step(K + 1, 1, Direction::LR, opts.sweeps, top_tail, p1, false, injected1, opts.acceptance_shots, rng);
  const StepRecord s2 =
      make_step(K + 1, 2, Direction::LR, opts.sweeps, top_second, p2, false, injected2, opts.acceptance_shots, rng);
  out.kept_steps.push_back(s1);
  out.kept_steps.push_back(s2);
  out.history.push_back(s1);
  out.history.push_back(s2);

  for (const auto& s : out.kept_steps) {
    if (std::isfinite(s.epsilon_step) && s.epsilon_step <= opts.escalation_threshold && !s.optimizer_failed) continue;
    if (std::isnan(s.epsilon_step) && !s.optimizer_failed) continue;
    std::ostringstream os;
    os << "step residual " << s.epsilon_step << " at layer " << s.layer << ", block " << s.block
       << " exceeds " << opts.escalation_threshold << "; a larger local bond dimension would be needed";
    out.recommendations.push_back({s.layer, s.block, s.epsilon_step, os.str()});
  }
  return out;
}

LearnResult learn_mera(const StateVector& state, const LearnerOptions& opts) {
  ControlEnvironment env(state, opts.tomography, true);
  auto sched = run_schedule(env, opts);
  LearnResult out;
  out.report = make_report(sched.kept_steps, sched.sweeps);
  out.history = std::move(sched.history);
  out.recommendations = std::move(sched.recommendations);
  out.settings_used = env.settings_used();
  if (opts.compute_oracle) out.oracle_infidelity = infidelity(generate_state(sched.circuit), state);
  out.circuit = std::move(sched.circuit);
  return out;
}

NoPostselectResult learn_mera_no_postselect(const StateVector& state, const LearnerOptions& opts) {
  ControlEnvironment env(state, opts.tomography, false);
  auto sched = run_schedule(env, opts);
  NoPostselectResult out;
  out.diagnostics.steps = std::move(sched.kept_steps);
  out.diagnostics.history = std::move(sched.history);
  out.diagnostics.sweeps_used = sched.sweeps;
  out.diagnostics.settings_used = env.settings_used();
  out.diagnostics.oracle_infidelity = infidelity(generate_state(sched.circuit), state);
  out.circuit = std::move(sched.circuit);
  return out;
}

}  // namespace mera
