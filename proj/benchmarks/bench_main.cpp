#include <benchmark/benchmark.h>

#include "meralearn/contraction.hpp"
#include "meralearn/learner.hpp"
#include "meralearn/renormalizer.hpp"
#include "meralearn/tomography.hpp"

using namespace mera;

static void BM_LearnControl(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  Rng rng(1);
  const auto psi = generate_state(random_mera(n, rng));
  LearnerOptions opts;
  opts.compute_oracle = false;
  for (auto _ : st) benchmark::DoNotOptimize(learn_mera(psi, opts).report.infidelity_bound);
}
BENCHMARK(BM_LearnControl)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_BlockTomography(benchmark::State& st) {
  Rng rng(2);
  const auto psi = generate_state(random_mera(16, rng));
  const TomographyOptions opts{TomoMode::sampled, 1000};
  for (auto _ : st) benchmark::DoNotOptimize(estimate_block(psi, {5, 6, 7}, opts, rng).rho_hat.matrix(0, 0));
}
BENCHMARK(BM_BlockTomography)->Unit(benchmark::kMillisecond);

static void BM_CgMinimize(benchmark::State& st) {
  Rng rng(3);
  const auto psi = generate_state(random_mera(8, rng));
  const ComplexMatrix rho = reduced_density(psi, {1, 2, 3}).matrix;
  for (auto _ : st) benchmark::DoNotOptimize(cg_minimize(rho, ObjectiveSpec{}, {}, std::nullopt, rng).f_min);
}
BENCHMARK(BM_CgMinimize)->Unit(benchmark::kMillisecond);

static void BM_Overlap(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  Rng rng(4);
  const auto a = random_mera(n, rng), b = random_mera(n, rng);
  for (auto _ : st) benchmark::DoNotOptimize(overlap(a, b).value);
  st.counters["max_open_bonds"] = overlap(a, b).stats.max_open_bonds;
}
BENCHMARK(BM_Overlap)->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMillisecond);

static void BM_ObservableSet(benchmark::State& st) {
  Rng rng(5);
  const auto c = random_mera(8, rng);
  for (auto _ : st) benchmark::DoNotOptimize(build_observable_set({2, 4, 6}, 1, c, rng).gram_eigenvalues.back());
}
BENCHMARK(BM_ObservableSet)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
