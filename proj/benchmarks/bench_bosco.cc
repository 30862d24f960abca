#include <benchmark/benchmark.h>

#include "pan/bosco.h"

namespace pan::bosco {
namespace {

struct Game {
  UtilityDistribution u = UtilityDistribution::Uniform(-1, 1);
  ChoiceSet vx, vy;
  explicit Game(std::size_t w)
      : vx(GenerateChoiceSet(u, w, std::uint64_t{1})), vy(GenerateChoiceSet(u, w, std::uint64_t{2})) {}
};

void BM_BestResponse(benchmark::State& state) {
  const Game g(static_cast<std::size_t>(state.range(0)));
  const Strategy sy = Strategy::FloorTruthful(g.vy);
  for (auto _ : state) {
    const auto lines = ResponseLines(g.vx, sy, g.u);
    benchmark::DoNotOptimize(ComputeBestResponse(lines, g.vx));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BestResponse)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

void BM_FindEquilibrium(benchmark::State& state) {
  const Game g(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(FindEquilibrium(g.vx, g.vy, g.u, g.u));
}
BENCHMARK(BM_FindEquilibrium)->RangeMultiplier(4)->Range(4, 256);

void BM_ExpectedNashProduct(benchmark::State& state) {
  const Game g(static_cast<std::size_t>(state.range(0)));
  const auto eq = FindEquilibrium(g.vx, g.vy, g.u, g.u);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ExpectedNashProduct(eq.sigma_x, eq.sigma_y, g.u, g.u));
  }
}
BENCHMARK(BM_ExpectedNashProduct)->RangeMultiplier(4)->Range(4, 256);

}  // namespace
}  // namespace pan::bosco
