#include "foldsense/harness.hpp"

#include <benchmark/benchmark.h>

using namespace foldsense;

namespace {

TrialInstance instance(int m, int k) {
  TrialConfig c;
  return make_instance(c, c.N, m, k, 0);
}

void BM_L1Equality(benchmark::State& state) {
  const TrialInstance in = instance(static_cast<int>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_bp_equality(in.encoder, in.y).xstar.data());
}
BENCHMARK(BM_L1Equality)->Arg(30)->Arg(40)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_IrwL1(benchmark::State& state) {
  const TrialInstance in = instance(40, 5);
  for (auto _ : state) benchmark::DoNotOptimize(irw_l1(in.encoder, in.y).xstar.data());
}
BENCHMARK(BM_IrwL1)->Unit(benchmark::kMillisecond);

void BM_L1Slp(benchmark::State& state) {
  TrialConfig c;
  const TrialInstance in = instance(40, 5);
  const DecodeResult warm = solve_bp_equality(in.encoder, in.y);
  const SPParams sp = slp_params_for(c);
  for (auto _ : state) benchmark::DoNotOptimize(slp_decode(in.encoder, in.y, warm.xstar, sp).xstar.data());
}
BENCHMARK(BM_L1Slp)->Unit(benchmark::kMillisecond);

void BM_L1Iht(benchmark::State& state) {
  TrialConfig c;
  const TrialInstance in = instance(40, 5);
  const DecodeResult warm = solve_bp_equality(in.encoder, in.y);
  const ClassParams cls{c.eta, 5, c.r, c.p};
  for (auto _ : state)
    benchmark::DoNotOptimize(l1_iht_pipeline(in.encoder, in.y, cls, {}, c.iht, &warm).result.xstar.data());
}
BENCHMARK(BM_L1Iht)->Unit(benchmark::kMillisecond);

void BM_NspConstant(benchmark::State& state) {
  const Encoder a = gaussian_encoder(8, 14, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nsp_constant(a, 2));
}
BENCHMARK(BM_NspConstant)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
