#include <benchmark/benchmark.h>

#include "pan/agreement_opt.h"
#include "support/fixtures.h"

namespace pan::agreement {
namespace {

void BM_OptimizeFlowVolumes(benchmark::State& state) {
  const auto inst = testing::RandomFlowInstance(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(OptimizeFlowVolumes(inst));
}
BENCHMARK(BM_OptimizeFlowVolumes)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_CompiledEvaluate(benchmark::State& state) {
  const auto inst = testing::RandomFlowInstance(3);
  const CompiledInstance model(inst);
  const auto p = inst.UpperBounds();
  for (auto _ : state) benchmark::DoNotOptimize(model.Evaluate(p));
}
BENCHMARK(BM_CompiledEvaluate);

void BM_ReferenceEvaluate(benchmark::State& state) {
  const auto inst = testing::RandomFlowInstance(3);
  const auto p = inst.UpperBounds();
  for (auto _ : state) benchmark::DoNotOptimize(EvaluatePoint(inst, p));
}
BENCHMARK(BM_ReferenceEvaluate);

}  // namespace
}  // namespace pan::agreement
