#include <benchmark/benchmark.h>

#include <numbers>

#include "critesn/analysis.hpp"
#include "critesn/contraction.hpp"

using namespace critesn;

namespace {

void BM_StepInto(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto res = make_orthogonal_reservoir(k, 1, 1.0, 1);
  Vector x = Vector::Constant(k, 0.1), next(k), lin(k);
  const Vector u = Vector::Constant(1, 0.5);
  for (auto _ : state) {
    step_into(res, x, u, next, lin);
    x.swap(next);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StepInto)->Arg(1)->Arg(16)->Arg(128);

void BM_Lyapunov(benchmark::State& state) {
  const auto res = make_alternating_neuron(1.0);
  const auto input = InputSequence::alternating(std::numbers::pi / 4);
  LyapunovOptions o;
  o.x0 = Vector::Constant(1, -std::numbers::pi / 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lyapunov_exponent(res, input, static_cast<int>(state.range(0)), o).exponent);
  }
}
BENCHMARK(BM_Lyapunov)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_CoverInequality(benchmark::State& state) {
  const auto tf = TransferFunction::tanh();
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_cover_inequality(tf, CoverParams::defaults(1)).worst_margin);
  }
}
BENCHMARK(BM_CoverInequality)->Unit(benchmark::kMillisecond);

void BM_SpectralSummary(benchmark::State& state) {
  const Matrix w = gaussian_matrix(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_summary(w).max_singular_value);
}
BENCHMARK(BM_SpectralSummary)->Arg(8)->Arg(64)->Arg(200)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
