// SPDX-License-Identifier: Apache-2.0
//
// Solve times of each precoder design, plus the building blocks the Monte
// Carlo loops spend most time in. Arguments are N_T and K.
#include <benchmark/benchmark.h>

#include "cisec/channel.hpp"
#include "cisec/evaluation.hpp"
#include "cisec/precoders.hpp"

using namespace cisec;

namespace {

ChannelSet channels(benchmark::State& state) {
  ChannelConfig cfg;
  cfg.antennas = static_cast<int>(state.range(0));
  cfg.eves = static_cast<int>(state.range(1));
  cfg.seed = 7;
  return sample_channels(cfg, 0);
}

Targets targets(const ChannelSet& ch) { return Targets::from_db(10.0, 5.0, ch.eves()); }

void BM_Conventional(benchmark::State& state) {
  const ChannelSet ch = channels(state);
  const Targets t = targets(ch);
  for (auto _ : state) benchmark::DoNotOptimize(solve_conventional(ch, t, 3));
}

void BM_Constructive(benchmark::State& state) {
  const ChannelSet ch = channels(state);
  const Targets t = targets(ch);
  const Constellation q = Constellation::qpsk();
  for (auto _ : state) benchmark::DoNotOptimize(solve_constructive(ch, t, q));
}

void BM_ConstructiveDestructive(benchmark::State& state) {
  const ChannelSet ch = channels(state);
  const Targets t = targets(ch);
  const Constellation q = Constellation::qpsk();
  for (auto _ : state) benchmark::DoNotOptimize(solve_constructive_destructive(ch, t, q));
}

void BM_RobustConventional(benchmark::State& state) {
  ChannelSet ch = channels(state);
  ch.kind = ChannelKind::estimated;
  const Targets t = targets(ch);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_robust_conventional(ch, Uncertainty{0.1, 0.3}, t, 3));
}

void BM_RobustConstructive(benchmark::State& state) {
  ChannelSet ch = channels(state);
  ch.kind = ChannelKind::estimated;
  const Targets t = targets(ch);
  const Constellation q = Constellation::qpsk();
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_robust_constructive(ch, Uncertainty{0.1, 0.3}, t, q));
}

void BM_ConstraintProbe(benchmark::State& state) {
  const ChannelSet ch = channels(state);
  const Targets t = targets(ch);
  const Constellation q = Constellation::qpsk();
  const SolveOutcome o = solve_constructive_destructive(ch, t, q);
  for (auto _ : state) benchmark::DoNotOptimize(satisfies_constraints(o, ch, t, q));
}

void BM_DetectPsk(benchmark::State& state) {
  const Constellation q = Constellation::qpsk();
  Complex y(0.3, 0.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect_psk(y, 0.1, q));
    y *= Complex(0.9999, 0.0141);
  }
}

void shapes(benchmark::internal::Benchmark* b) {
  for (int nt : {4, 6, 8}) b->Args({nt, nt / 2});
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_Conventional)->Apply(shapes);
BENCHMARK(BM_Constructive)->Apply(shapes);
BENCHMARK(BM_ConstructiveDestructive)->Apply(shapes);
BENCHMARK(BM_RobustConventional)->Apply(shapes);
BENCHMARK(BM_RobustConstructive)->Apply(shapes);
BENCHMARK(BM_ConstraintProbe)->Args({6, 3});
BENCHMARK(BM_DetectPsk);
BENCHMARK_MAIN();
