#include <gtest/gtest.h>

#include <numbers>

#include "meralearn/errors.hpp"
#include "meralearn/numerics.hpp"
#include "oracles.hpp"

using namespace mera;

namespace {

ComplexMatrix resum(const EigenDecomposition& e) {
  ComplexMatrix lam = ComplexMatrix::Zero(e.vectors.cols(), e.vectors.cols());
  for (std::size_t k = 0; k < e.values.size(); ++k) lam(k, k) = e.values[k];
  return e.vectors * lam * e.vectors.adjoint();
}

// exp(-i t H) by scaling and squaring of a Taylor series.
ComplexMatrix expm_taylor(const ComplexMatrix& h, double t) {
  const ComplexMatrix a = Complex(0, -t) * h;
  int squarings = 0;
  double scale = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (scale > 0.1) {
    scale /= 2;
    ++squarings;
  }
  const ComplexMatrix b = a / std::pow(2.0, squarings);
  ComplexMatrix term = ComplexMatrix::Identity(h.rows(), h.cols());
  ComplexMatrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace

TEST(EigHermitian, IdentityAndDiagonal) {
  auto e = eig_hermitian(ComplexMatrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(e.values[0], 1.0);
  EXPECT_DOUBLE_EQ(e.values[1], 1.0);
  auto q = eig_hermitian(ComplexMatrix::Identity(4, 4) * 0.25);
  for (double v : q.values) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(EigHermitian, ResumsRandomInputs) {
  Rng rng(7);
  for (int trial = 0; trial < 10000; ++trial) {
    const ComplexMatrix h = oracle::random_hermitian(4, rng);
    const auto e = eig_hermitian(h);
    ASSERT_LE(max_abs(h - resum(e)), 1e-9);
    for (std::size_t k = 1; k < e.values.size(); ++k) ASSERT_GE(e.values[k - 1], e.values[k]);
    ASSERT_LE(max_abs(e.vectors.adjoint() * e.vectors - ComplexMatrix::Identity(4, 4)), 1e-10);
    for (int k = 0; k < 4; ++k) ASSERT_LE(max_abs(h * e.vectors.col(k) - e.values[k] * e.vectors.col(k)), 1e-9);
  }
}

TEST(EigHermitian, PhaseConvention) {
  Rng rng(3);
  const auto e = eig_hermitian(oracle::random_hermitian(4, rng));
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < 4; ++i) {
      const Complex c = e.vectors(i, k);
      if (std::abs(c) > 1e-8) {
        EXPECT_NEAR(c.imag(), 0.0, 1e-12);
        EXPECT_GT(c.real(), 0.0);
        break;
      }
    }
  }
}

TEST(EigHermitian, RejectsNonHermitian) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(eig_hermitian(m), InvalidArgument);
}

TEST(ExpmHermitian, ZeroAndPauliZ) {
  EXPECT_LE(max_abs(expm_hermitian(ComplexMatrix::Zero(4, 4), 0.7) - ComplexMatrix::Identity(4, 4)), 1e-15);
  ComplexMatrix z = ComplexMatrix::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  const ComplexMatrix u = expm_hermitian(z, std::numbers::pi);
  EXPECT_LE(max_abs(u + ComplexMatrix::Identity(2, 2)), 1e-12);
}

TEST(ExpmHermitian, MatchesTaylorOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix h = oracle::random_hermitian(4, rng);
    const ComplexMatrix u = expm_hermitian(h, 0.3);
    EXPECT_LE(max_abs(u - expm_taylor(h, 0.3)), 1e-10);
    EXPECT_LE(unitarity_defect(u), 1e-10);
  }
}

TEST(ExpmHermitian, GroupProperty) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const ComplexMatrix h = oracle::random_hermitian(4, rng);
    std::uniform_real_distribution<double> u(-2, 2);
    const double s = u(rng), t = u(rng);
    EXPECT_LE(max_abs(expm_hermitian(h, s) * expm_hermitian(h, t) - expm_hermitian(h, s + t)), 1e-9);
  }
}

TEST(PartialTrace, ProductAndBell) {
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  rho(1, 1) = 1.0;  // |0><0| (x) |1><1|
  const int keep1[] = {1};
  ComplexMatrix r = partial_trace(rho, 2, keep1);
  EXPECT_NEAR(r(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(r(1, 1)), 0.0, 1e-15);

  ComplexVector bell = ComplexVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  r = partial_trace(bell * bell.adjoint(), 2, keep1);
  EXPECT_LE(max_abs(r - 0.5 * ComplexMatrix::Identity(2, 2)), 1e-15);
}

TEST(PartialTrace, MatchesIndexSumOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix rho = oracle::random_density(3, rng);
    for (std::vector<int> keep : {std::vector<int>{1, 2}, {1, 3}, {2, 3}, {2}}) {
      const ComplexMatrix r = partial_trace(rho, 3, keep);
      EXPECT_LE(max_abs(r - oracle::partial_trace_sum(rho, 3, keep)), 1e-12);
      EXPECT_NEAR(r.trace().real(), 1.0, 1e-12);
    }
  }
}

TEST(PartialTrace, Linear) {
  Rng rng(19);
  const ComplexMatrix a = oracle::random_density(3, rng), b = oracle::random_density(3, rng);
  const int keep[] = {1, 3};
  const ComplexMatrix lhs = partial_trace(0.3 * a + 0.7 * b, 3, keep);
  const ComplexMatrix rhs = 0.3 * partial_trace(a, 3, keep) + 0.7 * partial_trace(b, 3, keep);
  EXPECT_LE(max_abs(lhs - rhs), 1e-12);
}

TEST(PartialTrace, RejectsBadKeep) {
  const ComplexMatrix rho = ComplexMatrix::Identity(4, 4) / 4.0;
  EXPECT_THROW(partial_trace(rho, 2, std::vector<int>{}), InvalidArgument);
  EXPECT_THROW(partial_trace(rho, 2, std::vector<int>{3}), InvalidArgument);
}

TEST(HaarUnitary, DeterministicAndUnitary) {
  Rng a(42), b(42);
  const ComplexMatrix u = haar_unitary(4, a), v = haar_unitary(4, b);
  EXPECT_EQ(max_abs(u - v), 0.0);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) ASSERT_LE(unitarity_defect(haar_unitary(4, rng)), 1e-12);
  EXPECT_THROW(haar_unitary(1, rng), InvalidArgument);
}

TEST(HaarUnitary, SecondMomentOfTrace) {
  Rng rng(2024);
  double sum = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) sum += std::norm(haar_unitary(2, rng).trace());
  EXPECT_NEAR(sum / draws, 1.0, 0.05);
}

TEST(PauliBasis, OrthogonalityAndOrder) {
  const auto one = pauli_basis(1);
  ASSERT_EQ(one.size(), 4u);
  EXPECT_NEAR(std::abs((one[1] * one[2]).trace()), 0.0, 1e-15);
  EXPECT_NEAR(one[2](0, 1).imag(), -1.0, 1e-15);  // Y
  const auto two = pauli_basis(2);
  ASSERT_EQ(two.size(), 16u);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_LE(max_abs(two[i] * two[i] - ComplexMatrix::Identity(4, 4)), 1e-15);
    for (std::size_t j = 0; j < 16; ++j) EXPECT_NEAR(std::abs((two[i] * two[j]).trace()), i == j ? 4.0 : 0.0, 1e-12);
  }
  EXPECT_THROW(pauli_basis(0), InvalidArgument);
  EXPECT_THROW(pauli_basis(5), InvalidArgument);
}

TEST(PauliBasis, CompleteForThreeQubits) {
  Rng rng(8);
  const auto basis = pauli_basis(3);
  ASSERT_EQ(basis.size(), 64u);
  const ComplexMatrix h = oracle::random_hermitian(8, rng);
  ComplexMatrix sum = ComplexMatrix::Zero(8, 8);
  for (const auto& p : basis) sum += (p * h).trace() / 8.0 * p;
  EXPECT_LE(max_abs(sum - h), 1e-12);
}

TEST(PsdProject, IdempotentOnStates) {
  Rng rng(4);
  const ComplexMatrix rho = oracle::random_density(2, rng);
  EXPECT_LE(max_abs(psd_project(rho) - rho), 1e-12);
}

TEST(PsdProject, ClipsAndRenormalises) {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m.diagonal() << 0.6, 0.6, -0.1, -0.1;
  const ComplexMatrix p = psd_project(m);
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = expected(1, 1) = 0.5;
  EXPECT_LE(max_abs(p - expected), 1e-12);
  EXPECT_THROW(psd_project(-ComplexMatrix::Identity(2, 2)), InvalidArgument);
}

TEST(PsdProject, MatchesSpectrumOracle) {
  Rng rng(9);
  ComplexVector psi = ComplexVector::Zero(4);
  psi(0) = 1.0;
  const ComplexMatrix noisy = psi * psi.adjoint() + 0.05 * oracle::random_hermitian(4, rng);
  const auto e = eig_hermitian(noisy);
  double kept = 0.0;
  for (double v : e.values) kept += std::max(v, 0.0);
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k)
    expected += std::max(e.values[k], 0.0) / kept * e.vectors.col(k) * e.vectors.col(k).adjoint();
  const ComplexMatrix p = psd_project(noisy);
  EXPECT_LE(max_abs(p - expected), 1e-12);
  EXPECT_NEAR(p.trace().real(), 1.0, 1e-12);
  for (double v : eigvals_hermitian(p)) EXPECT_GE(v, -1e-12);
}
