#include <gtest/gtest.h>

#include "meralearn/errors.hpp"
#include "meralearn/mera.hpp"
#include "meralearn/state.hpp"
#include "oracles.hpp"

using namespace mera;

namespace {

StateVector ghz(int n) {
  ComplexVector a = ComplexVector::Zero(Eigen::Index{1} << n);
  a(0) = a(a.size() - 1) = 1.0 / std::sqrt(2.0);
  return StateVector(n, a);
}

}  // namespace

TEST(ApplyTwoQubit, IdentityAndInverse) {
  Rng rng(1);
  const auto psi = StateVector::random(5, rng);
  auto phi = psi;
  apply_two_qubit(phi, Matrix4c::Identity(), 2, 4);
  EXPECT_EQ((phi.amplitudes() - psi.amplitudes()).norm(), 0.0);
  const Matrix4c u = haar_unitary(4, rng);
  apply_two_qubit(phi, u, 5, 1);
  EXPECT_NEAR(phi.norm(), 1.0, 1e-12);
  apply_two_qubit(phi, u.adjoint(), 5, 1);
  EXPECT_LE((phi.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyTwoQubit, MatchesDenseKron) {
  Rng rng(2);
  for (auto [a, b] : {std::pair{2, 3}, std::pair{3, 2}, std::pair{1, 4}}) {
    const auto psi = StateVector::random(4, rng);
    const Matrix4c u = haar_unitary(4, rng);
    auto phi = psi;
    apply_two_qubit(phi, u, a, b);
    const ComplexVector expected = oracle::full_gate(u, 4, a, b) * psi.amplitudes();
    EXPECT_LE((phi.amplitudes() - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ApplyTwoQubit, RejectsBadSites) {
  StateVector psi(3);
  EXPECT_THROW(apply_two_qubit(psi, Matrix4c::Identity(), 0, 1), InvalidArgument);
  EXPECT_THROW(apply_two_qubit(psi, Matrix4c::Identity(), 2, 4), InvalidArgument);
  EXPECT_THROW(apply_two_qubit(psi, Matrix4c::Identity(), 2, 2), InvalidArgument);
  EXPECT_THROW(apply_two_qubit(psi, Matrix4c::Identity() * 1.1, 1, 2), InvalidArgument);
}

TEST(ReducedDensity, ZeroStateAndGhz) {
  const auto r = reduced_density(StateVector(6), {1, 2, 3});
  ComplexMatrix expected = ComplexMatrix::Zero(8, 8);
  expected(0, 0) = 1.0;
  EXPECT_LE(max_abs(r.matrix - expected), 1e-15);

  const auto g = reduced_density(ghz(4), {1, 2});
  expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = expected(3, 3) = 0.5;
  EXPECT_LE(max_abs(g.matrix - expected), 1e-15);
  EXPECT_THROW(reduced_density(ghz(6), {1, 2, 3, 4, 5}), InvalidArgument);
}

TEST(ReducedDensity, MatchesPartialTraceOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto psi = StateVector::random(6, rng);
    const std::vector<int> sites = trial % 2 ? std::vector<int>{3, 4, 5} : std::vector<int>{5, 1, 2};
    const auto r = reduced_density(psi, sites);
    ASSERT_LE(max_abs(r.matrix - oracle::reduced_via_full(psi, sites)), 1e-12);
    ASSERT_NEAR(r.matrix.trace().real(), 1.0, 1e-10);
    ASSERT_LE(hermiticity_defect(r.matrix), 1e-12);
  }
}

TEST(Postselect, AlreadyZeroAndPlus) {
  Rng rng(4);
  auto psi = StateVector::random(3, rng);
  // put site 2 in |0>: project and renormalise by hand
  ComplexVector a = psi.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (i & 2) a(i) = 0.0;
  a.normalize();
  StateVector zero(3, a);
  auto copy = zero;
  EXPECT_NEAR(measure_postselect_zero(copy, 2), 1.0, 1e-12);
  EXPECT_LE((copy.amplitudes() - zero.amplitudes()).norm(), 1e-12);

  // site 1 in |+>, rest |00>
  ComplexVector p = ComplexVector::Zero(8);
  p(0) = p(1) = 1.0 / std::sqrt(2.0);
  StateVector plus(3, p);
  EXPECT_NEAR(measure_postselect_zero(plus, 1), 0.5, 1e-12);
  EXPECT_NEAR(std::abs(plus.amplitude(0)), 1.0, 1e-12);

  ComplexVector one = ComplexVector::Zero(2);
  one(1) = 1.0;
  StateVector excited(1, one);
  EXPECT_THROW(measure_postselect_zero(excited, 1), PostSelectionError);
}

TEST(Postselect, InverseCircuitKeepsAncillasInZero) {
  Rng rng(5);
  const auto c = random_mera(8, rng);
  auto psi = generate_state(c);
  const auto order = placements(8);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    apply_two_qubit(psi, gate(c, *it).adjoint(), it->site_a, it->site_b);
    if (it->kind != GateKind::disentangler) {
      EXPECT_NEAR(measure_postselect_zero(psi, it->site_a), 1.0, 1e-10);
      if (it->kind == GateKind::top) EXPECT_NEAR(measure_postselect_zero(psi, it->site_b), 1.0, 1e-10);
    }
  }
}

TEST(PauliExpectation, BasicValues) {
  StateVector zero(4);
  EXPECT_DOUBLE_EQ(pauli_expectation(zero, PauliString({3}, {Pauli::Z})), 1.0);
  EXPECT_NEAR(pauli_expectation(zero, PauliString({2}, {Pauli::X})), 0.0, 1e-15);
}

TEST(PauliExpectation, MatchesDenseOracle) {
  Rng rng(6);
  std::uniform_int_distribution<int> letter(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto psi = StateVector::random(5, rng);
    PauliString p({1, 3, 4}, {Pauli(letter(rng)), Pauli(letter(rng)), Pauli(letter(rng))});
    const Complex e = psi.amplitudes().dot(oracle::full_pauli(p, 5) * psi.amplitudes());
    EXPECT_NEAR(pauli_expectation(psi, p), e.real(), 1e-12);
  }
}

TEST(SampleExpectation, EigenstateIsExact) {
  Rng rng(7);
  EXPECT_DOUBLE_EQ(sample_expectation(StateVector(3), PauliString({1, 2}, {Pauli::Z, Pauli::Z}), 17, rng), 1.0);
  EXPECT_THROW(sample_expectation(StateVector(3), PauliString({1}, {Pauli::Z}), 0, rng), InvalidArgument);
}

TEST(SampleExpectation, ZeroMeanConcentrates) {
  const PauliString x({1}, {Pauli::X});
  int inside = 0;
  for (int seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    if (std::abs(sample_expectation(StateVector(2), x, 10000, rng)) <= 0.05) ++inside;
  }
  EXPECT_GE(inside, 198);
}

TEST(SampleExpectation, LargeShotLimit) {
  Rng rng(8);
  const auto psi = StateVector::random(4, rng);
  const PauliString p({2, 4}, {Pauli::Y, Pauli::X});
  EXPECT_NEAR(sample_expectation(psi, p, 1000000, rng), pauli_expectation(psi, p), 5e-3);
}

TEST(SampleExpectation, Deterministic) {
  const PauliString p({1}, {Pauli::X});
  Rng a(9), b(9);
  EXPECT_EQ(sample_expectation(StateVector(2), p, 1000, a), sample_expectation(StateVector(2), p, 1000, b));
}
