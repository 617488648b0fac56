#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "meralearn/contraction.hpp"
#include "meralearn/errors.hpp"
#include "meralearn/io.hpp"
#include "meralearn/renormalizer.hpp"
#include "oracles.hpp"

using namespace mera;

namespace {

// Undo layers 1..tau physically, post-selecting every ancilla.
StateVector renormalize(StateVector psi, const MeraCircuit& c, int tau) {
  const auto vc = inverse_layers(c, tau);
  for (const auto& ev : vc.events()) {
    if (ev.projection) measure_postselect_zero(psi, ev.a);
    else apply_two_qubit(psi, ev.gate, ev.a, ev.b);
  }
  return psi;
}

double expectation(const StateVector& psi, const DenseOperator& op) {
  if (op.sites.empty()) return op.matrix(0, 0).real();
  return (reduced_density_unbounded(psi, op.sites) * op.matrix).trace().real();
}

// op = I on `site` (x) something, up to 1e-12
bool trivial_on(const DenseOperator& op, int site) {
  const auto it = std::find(op.sites.begin(), op.sites.end(), site);
  if (it == op.sites.end()) return true;
  const int k = static_cast<int>(op.sites.size());
  const int pos = static_cast<int>(it - op.sites.begin()) + 1;
  std::vector<int> rest;
  for (int q = 1; q <= k; ++q)
    if (q != pos) rest.push_back(q);
  if (rest.empty()) return max_abs(op.matrix - op.matrix.trace() / 2.0 * ComplexMatrix::Identity(2, 2)) <= 1e-12;
  const ComplexMatrix reduced = partial_trace(op.matrix, k, rest) / 2.0;
  // rebuild I_site (x) reduced in the operator's site order
  std::vector<int> order = rest;
  order.insert(order.begin() + (pos - 1), pos);
  ComplexMatrix rebuilt = ComplexMatrix::Zero(op.matrix.rows(), op.matrix.cols());
  const Eigen::Index d = op.matrix.rows();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const int bi = (i >> (k - pos)) & 1, bj = (j >> (k - pos)) & 1;
      if (bi != bj) continue;
      auto drop = [&](Eigen::Index x) {
        const Eigen::Index low = x & ((Eigen::Index{1} << (k - pos)) - 1);
        return ((x >> (k - pos + 1)) << (k - pos)) | low;
      };
      rebuilt(i, j) = reduced(drop(i), drop(j));
    }
  return max_abs(op.matrix - rebuilt) <= 1e-12;
}

DenseOperator random_operator(const std::vector<int>& sites, Rng& rng) {
  return {sites, oracle::random_hermitian(1 << sites.size(), rng)};
}

}  // namespace

TEST(Ascend, IdentityIsPreserved) {
  Rng rng(1);
  const auto c = random_mera(8, rng);
  const DenseOperator id{{2, 3, 4}, ComplexMatrix::Identity(8, 8)};
  const auto a = ascend_observable(id, c, 1);
  EXPECT_LE(max_abs(a.matrix - ComplexMatrix::Identity(a.matrix.rows(), a.matrix.cols())), 1e-12);
  for (int s : a.sites) EXPECT_EQ(s % 2, 0) << "ancilla " << s << " survived";
}

TEST(Ascend, IdentityLayerKeepsZ) {
  const auto c = identity_mera(8);
  const auto a = ascend_observable(to_dense(PauliString({4}, {Pauli::Z})), c, 1);
  EXPECT_NE(std::find(a.sites.begin(), a.sites.end(), 4), a.sites.end());
  const auto z = to_dense(PauliString({4}, {Pauli::Z}));
  ComplexMatrix expected = ComplexMatrix::Identity(1, 1);
  for (int s : a.sites) expected = kron(expected, s == 4 ? z.matrix : ComplexMatrix::Identity(2, 2));
  EXPECT_LE(max_abs(a.matrix - expected), 1e-15);
  // X on an ancilla position projects to zero
  const auto x = ascend_observable(to_dense(PauliString({3}, {Pauli::X})), c, 1);
  EXPECT_LE(x.matrix.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ascend, DefiningIdentity) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_mera(8, rng);
    const auto psi = generate_state(c);
    const int tau = 1 + trial % 2;
    const auto before = renormalize(psi, c, tau - 1);
    const auto after = renormalize(psi, c, tau);
    auto sites = renormalized_sites(8, tau - 1);
    std::shuffle(sites.begin(), sites.end(), rng);
    sites.resize(std::min<std::size_t>(sites.size(), 4));
    std::sort(sites.begin(), sites.end());
    const auto o = random_operator(sites, rng);
    const auto a = ascend_observable(o, c, tau);
    ASSERT_NEAR(expectation(after, a), expectation(before, o), 1e-10) << "trial " << trial;
  }
}

TEST(Ascend, CapacityErrorNamesTheLimit) {
  Rng rng(3);
  const auto vc = inverse_layers(random_mera(16, rng), 1);
  const auto o = to_dense(PauliString({4, 5, 6}, {Pauli::X, Pauli::X, Pauli::X}));
  try {
    vc.ascend(o, 3);
    FAIL() << "expected a capacity error";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("limit is 3"), std::string::npos) << e.what();
  }
}

TEST(CausalShadow, Examples) {
  Rng rng(4);
  const auto c = random_mera(8, rng);
  const auto zero = causal_shadow({3, 4}, 0, c);
  EXPECT_EQ(zero, (std::set<int>{3, 4}));
  const auto top = causal_shadow({4, 8}, 2, c);
  EXPECT_EQ(top.size(), 8u);
}

TEST(CausalShadow, MatchesNumericalAscent) {
  Rng rng(5);
  const auto c = random_mera(8, rng);
  const std::vector<int> block{2, 4, 6};
  const auto shadow = causal_shadow(block, 1, c);
  EXPECT_LE(shadow.size(), 8u);
  const auto vc = inverse_layers(c, 1);
  for (int s = 1; s <= 8; ++s) {
    bool any_nontrivial = false;
    for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
      const auto a = vc.ascend(to_dense(PauliString({s}, {p})));
      for (int b : block) any_nontrivial = any_nontrivial || !trivial_on(a, b);
    }
    EXPECT_EQ(any_nontrivial, shadow.count(s) > 0) << "site " << s;
  }
}

TEST(ObservableSet, IdentityCircuitIsPerfectlyConditioned) {
  Rng rng(6);
  const auto set = build_observable_set({2, 4, 6}, 1, identity_mera(8), rng);
  ASSERT_EQ(set.gram_eigenvalues.size(), 64u);
  for (double l : set.gram_eigenvalues) EXPECT_NEAR(l, 1.0, 1e-12);
  for (double m : conditioning_overhead(set).multipliers) EXPECT_NEAR(m, 1.0, 1e-12);
  EXPECT_TRUE(set.observables.front().is_identity());
}

TEST(ObservableSet, RandomCircuitReachesFullRank) {
  Rng rng(7);
  const auto c = random_mera(8, rng);
  const auto set = build_observable_set({2, 4, 6}, 1, c, rng);
  ASSERT_EQ(set.gram_eigenvalues.size(), 64u);
  ASSERT_EQ(set.orthonormal.size(), 64u);
  for (double l : set.gram_eigenvalues) EXPECT_GT(l, 1e-8);
  for (std::size_t i = 1; i < set.gram_eigenvalues.size(); ++i)
    EXPECT_GE(set.gram_eigenvalues[i - 1], set.gram_eigenvalues[i]);

  const double d = static_cast<double>(set.ascended.front().rows());
  const std::size_t r = set.ascended.size();
  Eigen::MatrixXcd gram(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) gram(i, j) = (set.ascended[i] * set.ascended[j].adjoint()).trace() / d;
  EXPECT_LE(hermiticity_defect(gram), 1e-10);
  for (double l : eigvals_hermitian(0.5 * (gram + gram.adjoint()))) EXPECT_GE(l, -1e-10);

  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      const Complex g = (set.orthonormal[i] * set.orthonormal[j].adjoint()).trace() / d;
      ASSERT_LE(std::abs(g - Complex(i == j ? 1.0 : 0.0)), 1e-8) << i << "," << j;
    }
}

TEST(ObservableSet, DuplicateCandidatesAreRankDeficient) {
  Rng rng(8);
  const auto c = random_mera(8, rng);
  const auto vc = inverse_layers(c, 1);
  std::vector<PauliString> dup{PauliString{}};
  for (int i = 0; i < 200; ++i) dup.push_back(PauliString({2}, {Pauli::Z}));
  EXPECT_THROW(build_observable_set(vc, {2, 4}, {2, 4}, dup, 16), RankDeficiencyError);
}

TEST(EstimateIndirect, ExactMeraMatchesPhysicalRenormalization) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Rng rng(seed);
    const auto c = random_mera(8, rng);
    const auto psi = generate_state(c);
    for (const auto& [block, tau] : {std::pair{std::vector<int>{2, 4, 6}, 1}, std::pair{std::vector<int>{4, 6, 8}, 1},
                                     std::pair{std::vector<int>{4, 8}, 2}}) {
      const auto set = build_observable_set(block, tau, c, rng);
      const auto est = estimate_block_indirect(psi, set, TomoMode::exact, 0, rng);
      const auto direct = reduced_density(renormalize(psi, c, tau), block);
      EXPECT_LE(max_abs(est.rho.matrix - direct.matrix), 1e-9) << "seed " << seed << " layer " << tau;
      EXPECT_NEAR(est.rho_region.trace().real(), 1.0, 1e-12);
    }
  }
}

TEST(EstimateIndirect, IdentityCircuit) {
  Rng rng(9);
  const auto c = identity_mera(8);
  const auto set = build_observable_set({2, 4, 6}, 1, c, rng);
  const auto est = estimate_block_indirect(generate_state(c), set, TomoMode::exact, 0, rng);
  ComplexMatrix expected = ComplexMatrix::Zero(8, 8);
  expected(0, 0) = 1.0;
  EXPECT_LE(max_abs(est.rho.matrix - expected), 1e-12);
}

TEST(EstimateIndirect, VarianceAmplificationIsBoundedByConditioning) {
  Rng rng(10);
  const auto c = random_mera(8, rng);
  const auto psi = generate_state(c);
  const auto set = build_observable_set({4, 8}, 2, c, rng);
  const long shots = 500;
  const int runs = 200;
  const std::size_t r = set.observables.size();
  std::vector<double> sum(r, 0.0), sq(r, 0.0);
  for (int k = 0; k < runs; ++k) {
    Rng shot_rng(1000 + k);
    const auto est = estimate_block_indirect(psi, set, TomoMode::sampled, shots, shot_rng);
    for (std::size_t i = 0; i < r; ++i) {
      sum[i] += est.r[i];
      sq[i] += est.r[i] * est.r[i];
    }
  }
  // exact Var(r_i) from the single-shot variances 1 - <P_j>^2, then the
  // sample variance against it at four standard errors
  const double band = 4.0 * std::sqrt(2.0 / (runs - 1));
  for (std::size_t i = 0; i < r; ++i) {
    double predicted = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      if (set.observables[j].is_identity()) continue;
      const double p = pauli_expectation(psi, set.observables[j]);
      predicted += set.mixing(i, j) * set.mixing(i, j) * (1.0 - p * p);
    }
    predicted /= set.gram_eigenvalues[i];
    EXPECT_LE(predicted, set.conditioning[i] * (1 + 1e-12)) << i;
    const double var = (sq[i] - sum[i] * sum[i] / runs) / (runs - 1);
    EXPECT_NEAR(var * shots / predicted, 1.0, band) << i;
  }
}

TEST(Conditioning, Multipliers) {
  AscendedObservableSet set;
  set.gram_eigenvalues = {1.0, 0.25};
  set.conditioning = {1.0, 4.0};
  const auto o = conditioning_overhead(set);
  EXPECT_EQ(o.multipliers, (std::vector<double>{1.0, 4.0}));
  EXPECT_EQ(o.worst, 4.0);
  EXPECT_EQ(total_multiplier({o, ConditioningOverhead{{2.0}, 2.0}}), 8.0);

  Rng rng(11);
  const auto real = build_observable_set({2, 4}, 1, random_mera(8, rng), rng);
  for (std::size_t i = 0; i < real.conditioning.size(); ++i) {
    EXPECT_NEAR(real.conditioning[i], 1.0 / real.gram_eigenvalues[i], 1e-12);
    if (i > 0) EXPECT_GE(real.conditioning[i], real.conditioning[i - 1]);
  }
}

TEST(Conditioning, ComposedSetMatchesMeasuredVariance) {
  // the layer-2 block ascended through both layers at once
  Rng rng(12);
  const auto c = random_mera(8, rng);
  const auto psi = generate_state(c);
  const auto set = build_observable_set({4, 8}, 2, c, rng);
  const long shots = 1000;
  const int runs = 200;
  double worst = 0.0;
  for (std::size_t i = 0; i < set.observables.size(); ++i) {
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < runs; ++k) {
      Rng shot_rng(5000 + k);
      const double x = estimate_block_indirect(psi, set, TomoMode::sampled, shots, shot_rng).r[i];
      s += x;
      s2 += x * x;
    }
    worst = std::max(worst, (s2 - s * s / runs) / (runs - 1) * shots);
  }
  const double predicted = conditioning_overhead(set).worst;
  EXPECT_LE(worst, 2.0 * predicted);
  EXPECT_GE(worst, 0.5 * predicted);
}

TEST(LearnIndirect, IdentityCircuit) {
  const auto r = learn_mera_indirect(generate_state(identity_mera(8)), IndirectOptions{});
  EXPECT_LE(r.diagnostics.oracle_infidelity, 1e-12);
  for (const auto& b : r.diagnostics.conditioning) EXPECT_GE(b.worst_multiplier, 1.0 - 1e-9);
  EXPECT_TRUE(std::isfinite(r.diagnostics.total_multiplier));
}

TEST(LearnIndirect, MatchesControlPipeline) {
  Rng rng(13);
  const auto psi = generate_state(random_mera(8, rng));
  IndirectOptions opts;
  const auto ind = learn_mera_indirect(psi, opts);
  EXPECT_LE(ind.diagnostics.oracle_infidelity, 1e-6);
  const auto ctl = learn_mera(psi, opts.learner);
  EXPECT_GE(fidelity(ind.circuit, ctl.circuit), 1.0 - 1e-6);
  EXPECT_FALSE(ind.diagnostics.conditioning.empty());
  EXPECT_EQ(serialize(ind.diagnostics).find("infidelity_bound"), std::string::npos);
}
