#include "meralearn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "meralearn/errors.hpp"

namespace mera {

const char* objective_kind_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::rank_tail: return "rank_tail";
    case ObjectiveKind::char_poly_b: return "char_poly_b";
    case ObjectiveKind::modified: return "modified";
  }
  return "?";
}

const std::array<Matrix4c, 16>& two_qubit_paulis() {
  static const std::array<Matrix4c, 16> table = [] {
    std::array<Matrix4c, 16> t;
    const auto basis = pauli_basis(2);
    for (int k = 0; k < 16; ++k) t[k] = basis[k];
    return t;
  }();
  return table;
}

namespace {

using Matrix8 = Eigen::Matrix<Complex, 8, 8>;

void require_objective_unitary(const Matrix4c& u) {
  const double d = max_abs(u.adjoint() * u - Matrix4c::Identity());
  if (!(d <= default_tolerances().objective_unitary)) {
    std::ostringstream os;
    os << "objective: candidate gate is not unitary (defect " << d << ")";
    throw InvalidArgument(os.str());
  }
}

Matrix8 as_block3(const ComplexMatrix& rho123) {
  if (rho123.rows() != 8 || rho123.cols() != 8) throw InvalidArgument("objective: expected an 8x8 block state");
  return rho123;
}

Matrix4c reduced_pair_impl(const Matrix4c& u, const Matrix8& rho, TracedSide side) {
  Matrix8 m = Matrix8::Zero();
  if (side == TracedSide::right) {
    m.block<4, 4>(0, 0) = u;
    m.block<4, 4>(4, 4) = u;
  } else {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        m(2 * i, 2 * j) = u(i, j);
        m(2 * i + 1, 2 * j + 1) = u(i, j);
      }
  }
  const Matrix8 s = m * rho * m.adjoint();
  Matrix4c a;
  if (side == TracedSide::right) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = s(2 * i, 2 * j) + s(2 * i + 1, 2 * j + 1);
  } else {
    a = s.block<4, 4>(0, 0) + s.block<4, 4>(4, 4);
  }
  // the finite-difference test matrices I + i eps P are not unitary
  return 0.5 * (a + a.adjoint()) / a.trace().real();
}

// Ascending eigenvalues.
Eigen::Vector4d spectrum(const Matrix4c& a) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double norm(const Gradient& g) {
  double s = 0.0;
  for (double x : g) s += x * x;
  return std::sqrt(s);
}

double dot(const Gradient& a, const Gradient& b) {
  double s = 0.0;
  for (int k = 0; k < 16; ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

Matrix4c reduced_pair(const Matrix4c& u, const ComplexMatrix& rho123, TracedSide side) {
  return reduced_pair_impl(u, as_block3(rho123), side);
}

double objective_rank_tail(const Matrix4c& u, const ComplexMatrix& rho123, TracedSide side) {
  require_objective_unitary(u);
  const auto ev = spectrum(reduced_pair(u, rho123, side));
  return ev(0) + ev(1);
}

double char_poly_b(const Matrix4c& a) {
  const Matrix4c a2 = a * a;
  const double p1 = a.trace().real();
  const double p2 = a2.trace().real();
  const double p3 = (a2 * a).trace().real();
  return (p1 * p1 * p1 - 3.0 * p1 * p2 + 2.0 * p3) / 6.0;
}

double objective_char_poly_b(const Matrix4c& u, const ComplexMatrix& rho123, TracedSide side) {
  require_objective_unitary(u);
  return char_poly_b(reduced_pair(u, rho123, side));
}

double objective_modified(const Matrix4c& u, const ComplexMatrix& rho123, TracedSide side, double epsilon_weight) {
  if (epsilon_weight < 0.0) throw InvalidArgument("objective_modified: epsilon_weight must be non-negative");
  require_objective_unitary(u);
  const auto ev = spectrum(reduced_pair(u, rho123, side));
  return ev(0) + ev(1) + epsilon_weight * ev(2);
}

double evaluate_objective(const ObjectiveSpec& spec, const Matrix4c& u, const ComplexMatrix& rho123) {
  switch (spec.kind) {
    case ObjectiveKind::rank_tail: return objective_rank_tail(u, rho123, spec.traced_side);
    case ObjectiveKind::char_poly_b: return objective_char_poly_b(u, rho123, spec.traced_side);
    case ObjectiveKind::modified: return objective_modified(u, rho123, spec.traced_side, spec.epsilon_weight);
  }
  return 0.0;
}

double objective_joint_pair(const Matrix4c& u, const ComplexMatrix& rho1234) {
  if (rho1234.rows() != 16 || rho1234.cols() != 16) throw InvalidArgument("objective_joint_pair: expected 16x16");
  require_objective_unitary(u);
  const ComplexMatrix m = kron(kron(ComplexMatrix::Identity(2, 2), u), ComplexMatrix::Identity(2, 2));
  const ComplexMatrix s = m * rho1234 * m.adjoint();
  const std::array<int, 2> left{1, 2}, right{3, 4};
  const Matrix4c a = partial_trace(0.5 * (s + s.adjoint()), 4, left);
  const Matrix4c b = partial_trace(0.5 * (s + s.adjoint()), 4, right);
  const auto ea = spectrum(a), eb = spectrum(b);
  return ea(0) + ea(1) + eb(0) + eb(1);
}

Gradient gradient_fd(const UnitaryObjective& f_centered, double fd_step, bool central) {
  if (!(fd_step > 0.0)) throw InvalidArgument("gradient_fd: fd_step must be positive");
  const auto& paulis = two_qubit_paulis();
  const Matrix4c id = Matrix4c::Identity();
  const Complex ie(0.0, fd_step);
  Gradient g{};
  const double f0 = central ? 0.0 : f_centered(id);
  for (int k = 1; k < 16; ++k) {
    const double fp = f_centered(id + ie * paulis[k]);
    if (central) {
      const double fm = f_centered(id - ie * paulis[k]);
      g[k] = (fp - fm) / (2.0 * fd_step);
    } else {
      g[k] = (fp - f0) / fd_step;
    }
  }
  return g;
}

Gradient gradient_fd(const ObjectiveSpec& spec, const ComplexMatrix& rho_centered, double fd_step, bool central) {
  return gradient_fd([&](const Matrix4c& w) { return evaluate_objective(spec, w, rho_centered); }, fd_step, central);
}

Matrix4c generator(const Gradient& c) {
  const auto& paulis = two_qubit_paulis();
  Matrix4c h = Matrix4c::Zero();
  for (int k = 0; k < 16; ++k) h += c[k] * paulis[k];
  return h;
}

double line_search(const std::function<double(double)>& phi, double f0, const LineSearchOptions& opts,
                   long* evaluations) {
  long evals = 0;
  auto eval = [&](double t) {
    ++evals;
    return phi(t);
  };

  std::vector<double> ts;
  for (double t = opts.t_initial; t < opts.t_max; t *= 2.0) ts.push_back(t);
  for (int i = 1; i <= opts.grid_points; ++i) ts.push_back(opts.t_max * i / opts.grid_points);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  std::vector<double> fs(ts.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    fs[i] = eval(ts[i]);
    if (fs[i] < fs[best]) best = i;
  }

  double lo, hi, t_best, f_best;
  if (fs[best] < f0) {
    t_best = ts[best];
    f_best = fs[best];
    lo = best == 0 ? 0.0 : ts[best - 1];
    hi = best + 1 < ts.size() ? ts[best + 1] : ts[best];
  } else {
    // no descent on the coarse probes: shrink towards zero
    t_best = 0.0;
    f_best = f0;
    for (double t = opts.t_initial / 2.0; t >= opts.t_min; t /= 2.0) {
      const double f = eval(t);
      if (f < f0) {
        t_best = t;
        f_best = f;
        break;
      }
    }
    if (t_best == 0.0) {
      if (evaluations) *evaluations += evals;
      return 0.0;
    }
    lo = 0.0;
    hi = 2.0 * t_best;
  }

  // golden-section refinement inside [lo, hi]
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  while ((b - a) > opts.rel_width * 0.5 * (a + b) && (b - a) > 1e-15) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  if (fc < f_best) {
    f_best = fc;
    t_best = c;
  }
  if (fd < f_best) {
    f_best = fd;
    t_best = d;
  }
  if (evaluations) *evaluations += evals;
  return t_best;
}

double line_search(const ObjectiveSpec& spec, const ComplexMatrix& rho_k, const Gradient& direction,
                   const LineSearchOptions& opts) {
  const double len = norm(direction);
  if (!(len > 0.0)) throw InvalidArgument("line_search: zero direction");
  Gradient unit = direction;
  for (double& x : unit) x /= len;
  const Matrix4c h = generator(unit);
  const double f0 = evaluate_objective(spec, Matrix4c::Identity(), rho_k);
  return line_search([&](double t) { return evaluate_objective(spec, expm_hermitian(h, t), rho_k); }, f0, opts);
}

namespace {

// One CG descent from u0. Returns the final iterate and appends to the trace.
Matrix4c descend(const UnitaryObjective& f, const OptimizerOptions& opts, const Matrix4c& u0,
                 std::vector<IterationRecord>& trace, long& evals) {
  Matrix4c u = u0;
  double fu = f(u);
  ++evals;
  trace.push_back({fu, 0.0, 0.0});

  Gradient g_prev{}, d_prev{};
  bool have_prev = false;
  std::vector<double> history{fu};

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    if (fu < opts.f_tol) break;

    // step 1: centre on the current iterate; f(W, U rho U^dag) = f(W U, rho)
    const UnitaryObjective centered = [&](const Matrix4c& w) {
      ++evals;
      return f(w * u);
    };
    // step 2: finite-difference gradient
    const Gradient g = gradient_fd(centered, opts.fd_step, opts.central_differences);
    const double gnorm = norm(g);
    if (!(gnorm > 0.0)) break;

    // step 3: conjugate direction
    Gradient d = g;
    if (have_prev) {
      double beta = 0.0;
      if (opts.beta == BetaFormula::polak_ribiere_plus) {
        Gradient diff;
        for (int k = 0; k < 16; ++k) diff[k] = g[k] - g_prev[k];
        const double den = dot(g_prev, g_prev);
        beta = den > 0.0 ? std::max(0.0, dot(g, diff) / den) : 0.0;
      } else {
        Gradient diff;
        for (int k = 0; k < 16; ++k) diff[k] = d_prev[k] - g[k];
        const double den = dot(d_prev, d_prev);
        beta = den > 0.0 ? std::max(0.0, dot(g, diff) / den) : 0.0;
      }
      for (int k = 0; k < 16; ++k) d[k] = g[k] + beta * d_prev[k];
      if (dot(g, d) <= 0.0) d = g;
    }

    // step 4: line search along exp(-i t D) U
    auto search = [&](const Gradient& dir) {
      const double len = norm(dir);
      Gradient unit = dir;
      for (double& x : unit) x /= len;
      const Matrix4c h = generator(unit);
      const double t = line_search([&](double s) { return f(expm_hermitian(h, s) * u); }, fu, opts.line_search,
                                   &evals);
      return std::pair<double, Matrix4c>(t, h);
    };
    auto [t, h] = search(d);
    if (t == 0.0 && d != g) {
      d = g;
      std::tie(t, h) = search(d);
    }
    if (t == 0.0) {
      trace.push_back({fu, gnorm, 0.0});
      break;
    }
    const Matrix4c next = expm_hermitian(h, t) * u;
    const double fnext = f(next);
    ++evals;
    if (fnext > fu) {
      trace.push_back({fu, gnorm, 0.0});
      break;
    }
    u = next;
    fu = fnext;
    trace.push_back({fu, gnorm, t});
    history.push_back(fu);

    g_prev = g;
    d_prev = d;
    have_prev = true;

    const int w = opts.stall_window;
    if (static_cast<int>(history.size()) > w) {
      const double old = history[history.size() - 1 - static_cast<std::size_t>(w)];
      if (old - fu <= opts.stall_tol * std::max(std::abs(old), std::numeric_limits<double>::min())) break;
    }
  }
  return u;
}

}  // namespace

OptimizationResult cg_minimize(const UnitaryObjective& f, const OptimizerOptions& opts,
                               const std::optional<Matrix4c>& init, Rng& rng) {
  if (opts.restarts < 1) throw InvalidArgument("cg_minimize: restarts must be at least 1");
  if (opts.max_iters < 0 || opts.stall_window < 1) throw InvalidArgument("cg_minimize: invalid iteration limits");
  OptimizationResult result;
  result.f_min = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opts.restarts; ++r) {
    Matrix4c start;
    if (r == 0) start = init.value_or(Matrix4c::Identity());
    else start = haar_unitary(4, rng);
    result.trace.restarts.emplace_back();
    const Matrix4c u = descend(f, opts, start, result.trace.restarts.back(), result.trace.evaluations);
    const double fu = result.trace.restarts.back().back().f;
    if (fu < result.f_min) {
      result.f_min = fu;
      result.u = u;
      result.trace.winner = r;
    }
    if (result.f_min <= opts.accept_tol) break;
  }
  result.failed = result.f_min > opts.failure_threshold;
  return result;
}

OptimizationResult cg_minimize(const ComplexMatrix& rho123, const ObjectiveSpec& spec, const OptimizerOptions& opts,
                               const std::optional<Matrix4c>& init, Rng& rng) {
  require_hermitian(rho123, default_tolerances().hermitian, "cg_minimize");
  if (rho123.rows() != 8) throw InvalidArgument("cg_minimize: expected a three-qubit block state");
  if (spec.kind != ObjectiveKind::modified && spec.epsilon_weight != 0.0)
    throw InvalidArgument("cg_minimize: epsilon_weight is only meaningful for the modified objective");
  return cg_minimize([&](const Matrix4c& u) { return evaluate_objective(spec, u, rho123); }, opts, init, rng);
}

Matrix4c extract_isometry(const ComplexMatrix& rho12) {
  if (rho12.rows() != 4 || rho12.cols() != 4) throw InvalidArgument("extract_isometry: expected a 4x4 pair state");
  const auto eig = eig_hermitian(rho12);
  Matrix4c v = eig.vectors.adjoint();
  return v;
}

}  // namespace mera
