#include <benchmark/benchmark.h>

#include <filesystem>

#include "pan/topology.h"
#include "support/synthetic.h"

namespace pan::topo {
namespace {

// One synthetic snapshot shared by all cases.
const AsGraph& Snapshot() {
  static const AsGraph g = [] {
    const auto dir = std::filesystem::temp_directory_path() / "pan_bench_snapshot";
    std::filesystem::create_directories(dir);
    const auto files = testing::WriteSyntheticSnapshot(dir.string(), 12000, 7);
    AsGraph graph = LoadAsRelationships(files.rel);
    std::filesystem::remove_all(dir);
    return graph;
  }();
  return g;
}

const MaCatalog& Catalog() {
  static const MaCatalog c(Snapshot(), GenerateMas(Snapshot()));
  return c;
}

void BM_GenerateMas(benchmark::State& state) {
  const AsGraph& g = Snapshot();
  for (auto _ : state) benchmark::DoNotOptimize(GenerateMas(g));
}
BENCHMARK(BM_GenerateMas)->Unit(benchmark::kMillisecond);

void BM_EnumerateGrcPaths(benchmark::State& state) {
  const AsGraph& g = Snapshot();
  const auto sample = SampleNodes(g, 64, 1);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(EnumerateGrcPaths(g, sample[i++ % sample.size()]));
}
BENCHMARK(BM_EnumerateGrcPaths)->Unit(benchmark::kMicrosecond);

void BM_MaPaths(benchmark::State& state) {
  const AsGraph& g = Snapshot();
  const MaCatalog& mas = Catalog();
  const auto sample = SampleNodes(g, 64, 1);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(MaPaths(g, mas, sample[i++ % sample.size()]));
}
BENCHMARK(BM_MaPaths)->Unit(benchmark::kMicrosecond);

void BM_PathsBetween(benchmark::State& state) {
  const AsGraph& g = Snapshot();
  const MaCatalog& mas = Catalog();
  const auto pairs = SampleConnectedPairs(g, 64, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(PathsBetween(g, mas, a, b));
  }
}
BENCHMARK(BM_PathsBetween)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace pan::topo
