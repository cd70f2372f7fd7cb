#include <benchmark/benchmark.h>

#include "semimyopic/belief.hpp"
#include "semimyopic/oracle.hpp"
#include "semimyopic/voi.hpp"

using namespace semimyopic;

namespace {

IndependentBeliefs table_beliefs(std::size_t n) {
  IndependentBeliefs items{{1.0, 0.0}};
  for (std::size_t i = 1; i < n; ++i) items.push_back({0.1 * static_cast<double>(i), 1.0});
  return items;
}

void BM_SingleItemQuadrature(benchmark::State& state) {
  const Beliefs beliefs(table_beliefs(2));
  const MeasurementModel model{5.0, 0.00144};
  Batch batch{{0, static_cast<int>(state.range(0))}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(intrinsic_batch_value(beliefs, model, StepUtility{}, batch));
  }
}
BENCHMARK(BM_SingleItemQuadrature)->Arg(1)->Arg(4)->Arg(10);

void BM_TanhQuadrature(benchmark::State& state) {
  const Beliefs beliefs(IndependentBeliefs{{0.4, 0.5}, {0.0, 2.0}, {0.2, 1.0}});
  const MeasurementModel model{3.0, 0.0};
  Batch batch{{0, 3, 0}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(intrinsic_batch_value(beliefs, model, TanhUtility{}, batch));
  }
}
BENCHMARK(BM_TanhQuadrature);

void BM_BestBatch(benchmark::State& state) {
  const auto family = static_cast<ConstraintFamily>(state.range(0));
  const Beliefs beliefs(table_beliefs(5));
  const MeasurementModel model{4.0, 0.001};
  EstimatorSettings settings;
  settings.mc_samples = 10'000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(best_batch(beliefs, model, StepUtility{}, family, 10, settings));
  }
  state.SetLabel(std::string(to_string(family)));
}
BENCHMARK(BM_BestBatch)
    ->Arg(static_cast<int>(ConstraintFamily::kMyopic))
    ->Arg(static_cast<int>(ConstraintFamily::kBlinkered))
    ->Arg(static_cast<int>(ConstraintFamily::kOmniMyopic))
    ->Arg(static_cast<int>(ConstraintFamily::kExhaustive))
    ->Unit(benchmark::kMillisecond);

void BM_ChainBestBatch(benchmark::State& state) {
  const auto family = static_cast<ConstraintFamily>(state.range(0));
  const Beliefs beliefs(ChainBelief::anchored(5, 0.0, 1.0, 2.0));
  const MeasurementModel model{4.0, 0.002};
  for (auto _ : state) {
    benchmark::DoNotOptimize(best_batch(beliefs, model, StepUtility{}, family, 10));
  }
  state.SetLabel(std::string(to_string(family)));
}
BENCHMARK(BM_ChainBestBatch)
    ->Arg(static_cast<int>(ConstraintFamily::kBlinkered))
    ->Arg(static_cast<int>(ConstraintFamily::kOmniMyopic))
    ->Unit(benchmark::kMillisecond);

void BM_ChainConditioning(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ChainBelief chain = ChainBelief::anchored(n, 0.0, 1.0, 0.5);
  const MeasurementModel model{2.0, 0.0};
  for (auto _ : state) {
    const auto next = chain_condition(chain, model, n / 2, 2, 0.7);
    benchmark::DoNotOptimize(chain_marginals(next));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChainConditioning)->RangeMultiplier(4)->Range(4, 4096)->Complexity(benchmark::oN);

void BM_OptimalPlan(benchmark::State& state) {
  const IndependentBeliefs beliefs{{1.0, 0.0}, {0.0, 1.0}};
  const MeasurementModel model{5.0, 0.00144};
  const int budget = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle::optimal_plan_value(beliefs, model, StepUtility{}, budget));
  }
}
BENCHMARK(BM_OptimalPlan)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
