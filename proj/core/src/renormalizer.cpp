#include "meralearn/renormalizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "meralearn/errors.hpp"

namespace mera {

namespace {

// Position of `site` in the sorted list, or -1.
int position(const std::vector<int>& sites, int site) {
  auto it = std::lower_bound(sites.begin(), sites.end(), site);
  return (it != sites.end() && *it == site) ? static_cast<int>(it - sites.begin()) : -1;
}

// M (x) I with the new site inserted in sorted order.
void extend(DenseOperator& op, int site) {
  const int k = static_cast<int>(op.sites.size());
  auto it = std::lower_bound(op.sites.begin(), op.sites.end(), site);
  const int p = static_cast<int>(it - op.sites.begin());
  op.sites.insert(it, site);
  const Eigen::Index d = Eigen::Index{1} << (k + 1);
  const int bitpos = k - p;  // bit of the inserted site in the new index
  const Eigen::Index low = (Eigen::Index{1} << bitpos) - 1;
  auto old_index = [&](Eigen::Index i) { return ((i >> (bitpos + 1)) << bitpos) | (i & low); };
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (((i >> bitpos) & 1) == ((j >> bitpos) & 1)) m(i, j) = op.matrix(old_index(i), old_index(j));
  op.matrix = std::move(m);
}

// g acting on columns of m, qubits at list positions pa, pb of k sites.
void apply_left(ComplexMatrix& m, const Matrix4c& g, int pa, int pb, int k) {
  const Eigen::Index ma = Eigen::Index{1} << (k - 1 - pa);
  const Eigen::Index mb = Eigen::Index{1} << (k - 1 - pb);
  const Eigen::Index d = m.rows();
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i & (ma | mb)) continue;
      const Eigen::Index idx[4] = {i, i | mb, i | ma, i | ma | mb};
      const Complex in[4] = {m(idx[0], c), m(idx[1], c), m(idx[2], c), m(idx[3], c)};
      for (int r = 0; r < 4; ++r) m(idx[r], c) = g(r, 0) * in[0] + g(r, 1) * in[1] + g(r, 2) * in[2] + g(r, 3) * in[3];
    }
}

// <0_site| M |0_site>
void project_zero(DenseOperator& op, int site) {
  const int k = static_cast<int>(op.sites.size());
  const int p = position(op.sites, site);
  const int bitpos = k - 1 - p;
  const Eigen::Index d = Eigen::Index{1} << (k - 1);
  const Eigen::Index low = (Eigen::Index{1} << bitpos) - 1;
  auto full = [&](Eigen::Index i) { return ((i >> bitpos) << (bitpos + 1)) | (i & low); };
  ComplexMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = op.matrix(full(i), full(j));
  op.matrix = std::move(m);
  op.sites.erase(op.sites.begin() + p);
}

// Removes `site` if the operator is I there up to `tol`.
bool drop_if_trivial(DenseOperator& op, int site, double tol) {
  const int p = position(op.sites, site);
  if (p < 0) return true;
  const int bitpos = static_cast<int>(op.sites.size()) - 1 - p;
  const Eigen::Index bit = Eigen::Index{1} << bitpos;
  const Eigen::Index d = op.matrix.rows();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      if ((i & bit) != (j & bit)) {
        if (std::abs(op.matrix(i, j)) > tol) return false;
      } else if (!(i & bit) && std::abs(op.matrix(i, j) - op.matrix(i | bit, j | bit)) > tol) {
        return false;
      }
    }
  project_zero(op, site);
  return true;
}

// Embed an operator whose sites are a subset of `region` into the region.
ComplexMatrix embed_in_region(DenseOperator op, const std::vector<int>& region) {
  for (int s : region)
    if (position(op.sites, s) < 0) extend(op, s);
  return std::move(op.matrix);
}

std::vector<int> positions_in(const std::vector<int>& region, const std::vector<int>& block) {
  std::vector<int> keep;
  for (int s : block) {
    const int p = position(region, s);
    if (p < 0) throw InvalidArgument("block site " + std::to_string(s) + " is not in the region");
    keep.push_back(p + 1);
  }
  return keep;
}

std::string sites_text(const std::vector<int>& sites) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < sites.size(); ++i) os << (i ? "," : "") << sites[i];
  os << '}';
  return os.str();
}

// Inverse of one layer. Isometry j only has to wait for disentanglers j - 1
// and j, so interleaving keeps ascended supports small.
void append_inverse_layer(VirtualCircuit& vc, const Layer& L, int t) {
  for (std::size_t j = 1; j <= L.isometries.size(); ++j) {
    if (j <= L.disentanglers.size())
      vc.add_gate(L.disentanglers[j - 1].adjoint(), physical_site(t, 2 * j), physical_site(t, 2 * j + 1));
    vc.add_gate(L.isometries[j - 1].adjoint(), physical_site(t, 2 * j - 1), physical_site(t, 2 * j));
    vc.add_projection(physical_site(t, 2 * j - 1));
  }
}

}  // namespace

DenseOperator to_dense(const PauliString& p) {
  const PauliString s = p.support();
  return {s.sites, s.matrix()};
}

void VirtualCircuit::add_gate(const Matrix4c& g, int a, int b) {
  if (a < 1 || b < 1 || a > n_ || b > n_ || a == b) throw InvalidArgument("VirtualCircuit: invalid gate sites");
  if (projected_.count(a) || projected_.count(b))
    throw InvalidArgument("VirtualCircuit: gate acts on a projected ancilla");
  events_.push_back({false, g, a, b});
}

void VirtualCircuit::add_projection(int site) {
  if (site < 1 || site > n_) throw InvalidArgument("VirtualCircuit: invalid projection site");
  if (!projected_.insert(site).second) throw InvalidArgument("VirtualCircuit: site projected twice");
  events_.push_back({true, Matrix4c::Identity(), site, 0});
}

std::set<int> VirtualCircuit::cone(const std::set<int>& sites, std::size_t from, std::size_t to) const {
  std::set<int> s = sites;
  for (std::size_t e = from; e < std::min(to, events_.size()); ++e) {
    const auto& ev = events_[e];
    if (ev.projection) continue;
    if (s.count(ev.a) || s.count(ev.b)) {
      s.insert(ev.a);
      s.insert(ev.b);
    }
  }
  return s;
}

std::set<int> VirtualCircuit::support_after(const std::set<int>& sites) const {
  std::set<int> s = cone(sites, 0, events_.size());
  for (int p : projected_) s.erase(p);
  return s;
}

DenseOperator VirtualCircuit::ascend(const DenseOperator& o, int max_sites) const {
  DenseOperator op = o;
  if (!std::is_sorted(op.sites.begin(), op.sites.end())) throw InvalidArgument("ascend: sites must be increasing");
  const Eigen::Index d0 = Eigen::Index{1} << op.sites.size();
  if (op.matrix.rows() != d0 || op.matrix.cols() != d0) throw InvalidArgument("ascend: operator dimension mismatch");
  for (const auto& ev : events_) {
    if (ev.projection) {
      if (position(op.sites, ev.a) >= 0) project_zero(op, ev.a);
      continue;
    }
    const bool ha = position(op.sites, ev.a) >= 0, hb = position(op.sites, ev.b) >= 0;
    if (!ha && !hb) continue;
    if (!ha) extend(op, ev.a);
    if (!hb) extend(op, ev.b);
    const int k = static_cast<int>(op.sites.size());
    if (k > max_sites) {
      throw CapacityError("ascend: operator support grew to " + std::to_string(k) + " sites, dense limit is " +
                          std::to_string(max_sites));
    }
    const int pa = position(op.sites, ev.a), pb = position(op.sites, ev.b);
    // g M g^dag = g (g M^dag)^dag
    ComplexMatrix left = op.matrix.adjoint();
    apply_left(left, ev.gate, pa, pb, k);
    ComplexMatrix full = left.adjoint();
    apply_left(full, ev.gate, pa, pb, k);
    op.matrix = std::move(full);
  }
  if (op.sites.empty()) {
    // a scalar; keep it as a 1x1 operator on no sites
    return op;
  }
  return op;
}

VirtualCircuit inverse_layers(const MeraCircuit& c, int tau) {
  if (tau < 0 || tau > depth(c.n)) throw InvalidArgument("inverse_layers: layer out of range");
  VirtualCircuit vc(c.n);
  for (int t = 1; t <= tau; ++t) {
    const auto& L = c.layers.at(t - 1);
    append_inverse_layer(vc, L, t);
  }
  return vc;
}

DenseOperator ascend_observable(const DenseOperator& o, const MeraCircuit& c, int tau) {
  if (tau < 1 || tau > depth(c.n)) throw InvalidArgument("ascend_observable: layer out of range");
  VirtualCircuit vc(c.n);
  append_inverse_layer(vc, c.layers.at(tau - 1), tau);
  return vc.ascend(o);
}

std::vector<int> renormalized_sites(int n, int tau) {
  std::vector<int> out;
  for (int s = 1; s <= (n >> tau); ++s) out.push_back(s << tau);
  return out;
}

std::set<int> causal_shadow(const std::vector<int>& block, int tau, const MeraCircuit& c) {
  const VirtualCircuit vc = inverse_layers(c, tau);
  std::set<int> shadow;
  for (int s = 1; s <= c.n; ++s) {
    const auto sup = vc.support_after({s});
    if (std::any_of(block.begin(), block.end(), [&](int b) { return sup.count(b) > 0; })) shadow.insert(s);
  }
  return shadow;
}

std::vector<int> feeding_sites(const VirtualCircuit& vc, const std::vector<int>& region) {
  std::vector<int> out;
  for (int s = 1; s <= vc.n(); ++s) {
    const auto sup = vc.support_after({s});
    if (std::all_of(sup.begin(), sup.end(), [&](int x) { return position(region, x) >= 0; })) out.push_back(s);
  }
  return out;
}

std::vector<int> extended_region(const VirtualCircuit& vc, const std::vector<int>& block) {
  std::set<int> region(block.begin(), block.end());
  for (int x = 1; x <= vc.n(); ++x) {
    if (vc.projected().count(x)) continue;
    auto c = vc.cone({x}, vc.layer_start(), vc.events().size());
    for (int p : vc.projected()) c.erase(p);
    if (std::any_of(block.begin(), block.end(), [&](int b) { return c.count(b) > 0; })) region.insert(c.begin(), c.end());
  }
  return {region.begin(), region.end()};
}

std::vector<PauliString> candidate_strings(const std::vector<int>& sites, int max_weight, long budget, Rng& rng) {
  const int f = static_cast<int>(sites.size());
  std::vector<PauliString> pool;
  // enumerate supports by weight, letters X/Y/Z on each
  std::vector<int> chosen;
  auto emit = [&](const std::vector<int>& support) {
    const int w = static_cast<int>(support.size());
    int total = 1;
    for (int i = 0; i < w; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      std::vector<int> s;
      std::vector<Pauli> l;
      int rest = code;
      for (int i = 0; i < w; ++i) {
        s.push_back(sites[support[i]]);
        l.push_back(static_cast<Pauli>(1 + rest % 3));
        rest /= 3;
      }
      pool.emplace_back(std::move(s), std::move(l));
    }
  };
  auto recurse = [&](auto&& self, int start, int remaining) -> void {
    if (!chosen.empty()) emit(chosen);
    if (remaining == 0) return;
    for (int i = start; i < f; ++i) {
      chosen.push_back(i);
      self(self, i + 1, remaining - 1);
      chosen.pop_back();
    }
  };
  recurse(recurse, 0, std::min(max_weight, f));
  std::shuffle(pool.begin(), pool.end(), rng);
  if (static_cast<long>(pool.size()) > budget) pool.resize(static_cast<std::size_t>(budget));
  pool.insert(pool.begin(), PauliString{});
  return pool;
}

AscendedObservableSet build_observable_set(const VirtualCircuit& vc, const std::vector<int>& block,
                                           const std::vector<int>& region, const std::vector<PauliString>& candidates,
                                           long target_rank, const ObservableSetOptions& opts) {
  if (!std::is_sorted(region.begin(), region.end())) throw InvalidArgument("build_observable_set: unsorted region");
  if (region.size() > 4) {
    throw CapacityError("build_observable_set: region " + sites_text(region) +
                        " exceeds the four-site reconstruction limit");
  }
  const int kr = static_cast<int>(region.size());
  const Eigen::Index d = Eigen::Index{1} << kr;
  const Eigen::Index len = d * d;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  // block operators X (x) I that the span must contain when target_rank = 0
  std::vector<ComplexVector> block_ops;
  if (target_rank == 0) {
    const auto basis = pauli_basis(static_cast<int>(block.size()));
    for (const auto& P : basis) {
      const DenseOperator op{block, P};
      block_ops.push_back(Eigen::Map<const ComplexVector>(embed_in_region(op, region).data(), len) * inv_sqrt_d);
    }
  }

  AscendedObservableSet set;
  set.block = block;
  set.region = region;

  // Pool of ascended candidates, filled in chunks. Selection is pivoted: the
  // candidate with the largest residual outside the current span goes first.
  std::vector<std::size_t> pool_index;
  std::vector<ComplexVector> pool, residual;
  std::size_t next = 0;
  auto grow = [&]() {
    const std::size_t stop = std::min(candidates.size(), next + opts.pool_chunk);
    for (; next < stop; ++next) {
      ++set.candidates_tried;
      DenseOperator asc = vc.ascend(to_dense(candidates[next]));
      const auto outside = asc.sites;
      bool inside = true;
      for (int s : outside)
        if (position(region, s) < 0 && !(inside = drop_if_trivial(asc, s, 1e-12))) break;
      if (!inside) continue;
      const ComplexMatrix a = embed_in_region(asc, region);
      pool_index.push_back(next);
      pool.push_back(Eigen::Map<const ComplexVector>(a.data(), len) * inv_sqrt_d);
      residual.push_back(pool.back());
    }
  };

  std::vector<ComplexVector> q;  // orthonormal basis of the span
  std::vector<std::size_t> chosen;
  std::vector<bool> used;
  std::vector<ComplexVector> block_res = block_ops;
  auto covered = [&]() {
    return std::all_of(block_res.begin(), block_res.end(), [](const ComplexVector& b) { return b.squaredNorm() < 1e-10; });
  };
  auto finished = [&]() {
    const long have = static_cast<long>(q.size());
    if (target_rank > 0) return have >= target_rank;
    return have == len || covered();
  };
  auto accept = [&](std::size_t i) {
    used[i] = true;
    const ComplexVector qi = residual[i] / residual[i].norm();
    for (auto& r : residual) r -= qi.dot(r) * qi;
    for (auto& b : block_res) b -= qi.dot(b) * qi;
    q.push_back(qi);
    chosen.push_back(i);
  };
  auto select = [&](double floor) {
    while (!finished()) {
      double best = -1.0;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (used[i]) continue;
        const double r2 = residual[i].squaredNorm();
        if (r2 > best) best = r2, arg = i;
      }
      if (best < floor || best <= opts.novelty * pool[arg].squaredNorm()) return;
      accept(arg);
    }
  };
  // the identity string (if present) is taken first
  grow();
  used.assign(pool.size(), false);
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (candidates[pool_index[i]].is_identity()) {
      accept(i);
      break;
    }
  double bar = opts.good_residual;
  while (true) {
    select(bar);
    bar *= 0.5;
    if (finished() || next >= candidates.size()) break;
    grow();
    used.resize(pool.size(), false);
    // re-orthogonalise the newcomers against the current span
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!used[i])
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& qi : q) residual[i] -= qi.dot(residual[i]) * qi;
  }
  select(0.0);

  std::vector<ComplexVector> vecs;
  for (std::size_t i : chosen) {
    vecs.push_back(pool[i]);
    set.observables.push_back(candidates[pool_index[i]]);
    set.ascended.push_back(Eigen::Map<const ComplexMatrix>(pool[i].data(), d, d) / inv_sqrt_d);
  }

  const long have = static_cast<long>(q.size());
  const bool done = target_rank > 0 ? have >= target_rank : covered();
  if (!done) {
    std::ostringstream os;
    os << "observables on " << sites_text(region) << " reach rank " << have << " after " << set.candidates_tried
       << " candidates; the block " << sites_text(block) << " is not spanned";
    if (target_rank > 0) os << " (target rank " << target_rank << ")";
    throw RankDeficiencyError(os.str());
  }

  const Eigen::Index r = static_cast<Eigen::Index>(vecs.size());
  Eigen::MatrixXd gram(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) gram(i, j) = gram(j, i) = vecs[i].dot(vecs[j]).real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  set.mixing.resize(r, r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Eigen::Index src = r - 1 - i;  // descending
    const double lambda = solver.eigenvalues()(src);
    if (!(lambda > opts.cutoff)) {
      std::ostringstream os;
      os << "Gram eigenvalue " << lambda << " below cutoff " << opts.cutoff << " for block " << sites_text(block);
      throw RankDeficiencyError(os.str());
    }
    set.gram_eigenvalues.push_back(lambda);
    set.conditioning.push_back(1.0 / lambda);
    set.mixing.row(i) = solver.eigenvectors().col(src).transpose();
  }
  for (Eigen::Index i = 0; i < r; ++i) {
    ComplexMatrix R = ComplexMatrix::Zero(d, d);
    for (Eigen::Index j = 0; j < r; ++j) R += set.mixing(i, j) * set.ascended[j];
    set.orthonormal.push_back(R / std::sqrt(set.gram_eigenvalues[i]));
  }
  return set;
}

AscendedObservableSet build_observable_set(const VirtualCircuit& vc, const std::vector<int>& block,
                                           const std::vector<int>& region, long target_rank, Rng& rng,
                                           const ObservableSetOptions& opts) {
  const auto feed = feeding_sites(vc, region);
  const auto candidates = candidate_strings(feed, opts.max_weight, opts.candidate_budget, rng);
  return build_observable_set(vc, block, region, candidates, target_rank, opts);
}

AscendedObservableSet build_observable_set(const std::vector<int>& block, int tau, const MeraCircuit& c, Rng& rng,
                                           const ObservableSetOptions& opts) {
  std::vector<int> sorted = block;
  std::sort(sorted.begin(), sorted.end());
  const long target = 1L << (2 * sorted.size());
  const auto vc = inverse_layers(c, tau);
  // strings that stay inside the block first, then the rest of the shadow
  auto candidates = candidate_strings(feeding_sites(vc, sorted), opts.max_weight, opts.candidate_budget, rng);
  const auto shadow = causal_shadow(sorted, tau, c);
  const auto wide = candidate_strings({shadow.begin(), shadow.end()}, opts.max_weight, opts.candidate_budget, rng);
  candidates.insert(candidates.end(), wide.begin() + 1, wide.end());
  return build_observable_set(vc, sorted, sorted, candidates, target, opts);
}

IndirectEstimate estimate_block_indirect(const StateVector& rho0, const AscendedObservableSet& set, TomoMode mode,
                                         long shots, Rng& rng) {
  if (mode == TomoMode::sampled && shots < 1) throw InvalidArgument("estimate_block_indirect: shots must be positive");
  const std::size_t r = set.observables.size();
  const int kr = static_cast<int>(set.region.size());
  const Eigen::Index d = Eigen::Index{1} << kr;
  IndirectEstimate est;
  est.o.resize(r);
  for (std::size_t j = 0; j < r; ++j) {
    const auto& p = set.observables[j];
    if (p.is_identity()) est.o[j] = 1.0;
    else if (mode == TomoMode::exact) est.o[j] = pauli_expectation(rho0, p);
    else est.o[j] = sample_expectation(rho0, p, shots, rng);
  }
  est.rho_region = ComplexMatrix::Zero(d, d);
  for (std::size_t i = 0; i < r; ++i) {
    double ri = 0.0, factor = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      ri += set.mixing(i, j) * est.o[j];
      if (!set.observables[j].is_identity()) factor += set.mixing(i, j) * set.mixing(i, j);
    }
    ri /= std::sqrt(set.gram_eigenvalues[i]);
    est.r.push_back(ri);
    est.variance_factor.push_back(factor / set.gram_eigenvalues[i]);
    est.rho_region += ri * set.orthonormal[i];
  }
  est.rho_region /= static_cast<double>(d);
  est.rho_region = 0.5 * (est.rho_region + est.rho_region.adjoint());
  const auto keep = positions_in(set.region, set.block);
  ComplexMatrix rb = partial_trace(est.rho_region, kr, keep);
  est.rho = {set.block, psd_project(0.5 * (rb + rb.adjoint()))};
  return est;
}

ConditioningOverhead conditioning_overhead(const AscendedObservableSet& set) {
  ConditioningOverhead c;
  c.multipliers = set.conditioning;
  c.worst = c.multipliers.empty() ? 1.0 : *std::max_element(c.multipliers.begin(), c.multipliers.end());
  return c;
}

double total_multiplier(const std::vector<ConditioningOverhead>& stages) {
  double t = 1.0;
  for (const auto& s : stages) t *= s.worst;
  return t;
}

IndirectEnvironment::IndirectEnvironment(std::shared_ptr<const StateVector> state, IndirectOptions opts)
    : state_(std::move(state)),
      opts_(std::move(opts)),
      circuit_(state_->n()),
      log_(std::make_shared<std::vector<BlockConditioning>>()) {}

std::unique_ptr<LearningEnvironment> IndirectEnvironment::clone() const {
  return std::make_unique<IndirectEnvironment>(*this);
}

void IndirectEnvironment::mark_layer_start() {
  ++layer_;
  circuit_.mark_layer_start();
}

ComplexMatrix IndirectEnvironment::block_state(const std::vector<int>& sites, Rng& rng) {
  try {
    const auto region = extended_region(circuit_, sites);
    const auto set = build_observable_set(circuit_, sites, region, 0, rng, opts_.observables);
    const auto est = estimate_block_indirect(*state_, set, opts_.mode, opts_.shots, rng);
    const auto over = conditioning_overhead(set);
    log_->push_back({layer_, sites, region, set.gram_eigenvalues.back(), over.worst, set.candidates_tried});
    return est.rho.matrix;
  } catch (const CapacityError& e) {
    throw CapacityError(std::string(e.what()) + " (layer " + std::to_string(layer_) + ", block " + sites_text(sites) +
                        ")");
  } catch (const RankDeficiencyError& e) {
    throw RankDeficiencyError(std::string(e.what()) + " (layer " + std::to_string(layer_) + ", block " +
                              sites_text(sites) + ")");
  }
}

double IndirectEnvironment::discard_ancilla(int site) {
  circuit_.add_projection(site);
  return std::numeric_limits<double>::quiet_NaN();
}

IndirectResult learn_mera_indirect(const StateVector& state, const IndirectOptions& opts) {
  auto shared = std::make_shared<const StateVector>(state);
  IndirectEnvironment env(shared, opts);
  auto sched = run_schedule(env, opts.learner);
  IndirectResult out;
  out.diagnostics.steps = std::move(sched.kept_steps);
  out.diagnostics.sweeps_used = sched.sweeps;
  out.diagnostics.conditioning = env.conditioning();
  const int layers = depth(state.n()) + 1;
  out.diagnostics.layer_worst_multiplier.assign(static_cast<std::size_t>(layers), 1.0);
  for (const auto& c : out.diagnostics.conditioning) {
    if (c.layer >= 1 && c.layer <= layers) {
      auto& w = out.diagnostics.layer_worst_multiplier[c.layer - 1];
      w = std::max(w, c.worst_multiplier);
    }
  }
  out.diagnostics.total_multiplier = 1.0;
  for (double w : out.diagnostics.layer_worst_multiplier) out.diagnostics.total_multiplier *= w;
  out.diagnostics.oracle_infidelity = infidelity(generate_state(sched.circuit), state);
  out.circuit = std::move(sched.circuit);
  return out;
}

}  // namespace mera
