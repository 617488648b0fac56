#include <gtest/gtest.h>

#include <algorithm>

#include "meralearn/errors.hpp"
#include "meralearn/tomography.hpp"
#include "oracles.hpp"

using namespace mera;

TEST(Settings, Counts) {
  EXPECT_EQ(settings_for_block({1, 2}).size(), 9u);
  EXPECT_EQ(settings_for_block({1, 2, 3}).size(), 27u);
  EXPECT_EQ(settings_for_block({1, 2, 3, 4}).size(), 81u);
  EXPECT_THROW(settings_for_block({1}), InvalidArgument);
}

TEST(Settings, EveryStringHasACompatibleSetting) {
  const auto settings = settings_for_block({2, 3, 4});
  EXPECT_EQ(settings.front(), (Setting{Pauli::X, Pauli::X, Pauli::X}));
  const auto p = PauliString({2, 3, 4}, {Pauli::I, Pauli::Y, Pauli::I});
  const Setting s = first_compatible_setting(p);
  EXPECT_EQ(s, (Setting{Pauli::X, Pauli::Y, Pauli::X}));
  EXPECT_NE(std::find(settings.begin(), settings.end(), s), settings.end());
}

TEST(EstimateBlock, ExactZeroState) {
  Rng rng(1);
  const auto e = estimate_block(StateVector(4), {1, 2, 3}, {}, rng);
  ComplexMatrix expected = ComplexMatrix::Zero(8, 8);
  expected(0, 0) = 1.0;
  EXPECT_LE(max_abs(e.rho_hat.matrix - expected), 1e-12);
  EXPECT_EQ(e.records.size(), 63u);
}

TEST(EstimateBlock, ExactMatchesPartialTrace) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto psi = StateVector::random(5, rng);
    const std::vector<int> sites{2, 3, 4};
    const auto e = estimate_block(psi, sites, {}, rng);
    ASSERT_LE(max_abs(e.rho_hat.matrix - oracle::reduced_via_full(psi, sites)), 1e-12);
  }
}

TEST(EstimateBlock, InversionReproducesEstimates) {
  Rng rng(3);
  const auto psi = StateVector::random(4, rng);
  TomographyOptions opts{TomoMode::sampled, 200};
  const auto e = estimate_block(psi, {1, 2, 3}, opts, rng);
  for (const auto& [p, rec] : e.records) {
    const ComplexMatrix op = embed(p, e.sites);
    EXPECT_NEAR((e.rho_linear * op).trace().real(), rec.estimate, 1e-12) << p.to_string();
    EXPECT_EQ(rec.shots, 200);
  }
  EXPECT_NEAR(e.rho_hat.matrix.trace().real(), 1.0, 1e-12);
  for (double v : eigvals_hermitian(e.rho_hat.matrix)) EXPECT_GE(v, -1e-12);
}

TEST(EstimateBlock, SampledConcentration) {
  int good = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    const auto psi = StateVector::random(4, rng);
    const auto e = estimate_block(psi, {2, 3, 4}, {TomoMode::sampled, 100000}, rng);
    if (max_abs(e.rho_hat.matrix - reduced_density(psi, {2, 3, 4}).matrix) <= 0.02) ++good;
  }
  EXPECT_GE(good, 19);
}

TEST(EstimateBlock, ErrorShrinksAsInverseSqrtShots) {
  auto median_error = [](long shots) {
    std::vector<double> errs;
    for (int seed = 0; seed < 50; ++seed) {
      Rng rng(500 + seed);
      const auto psi = StateVector::random(3, rng);
      const auto e = estimate_block(psi, {1, 2, 3}, {TomoMode::sampled, shots}, rng);
      errs.push_back((e.rho_hat.matrix - reduced_density(psi, {1, 2, 3}).matrix).norm());
    }
    std::nth_element(errs.begin(), errs.begin() + 25, errs.end());
    return errs[25];
  };
  const double ratio = median_error(16000) / median_error(4000);
  EXPECT_GE(ratio, 0.4);
  EXPECT_LE(ratio, 0.6);
}

TEST(SettingCount, LayoutArithmetic) {
  EXPECT_EQ(setting_count(4, 1), 27);
  EXPECT_EQ(setting_count(8, 1), 27 * (3 + 1));
  EXPECT_EQ(setting_count(16, 1), 297);
  EXPECT_EQ(setting_count(16, 3), 3 * 297);
  EXPECT_THROW(setting_count(24, 1), InvalidArgument);
}
