#include <benchmark/benchmark.h>

#include "flowgauge/redundancy.hpp"
#include "support/generators.hpp"

namespace {

void BM_ClusterDuplicates(benchmark::State& state) {
  const auto ds = flowgauge::testing::planted_corpus(
      3, {.n_flows = static_cast<std::size_t>(state.range(0)), .duplicate_share = 0.6, .max_len = 30});
  const auto variant = state.range(1) ? flowgauge::KeyVariant::SizesDirsIpts : flowgauge::KeyVariant::SizesDirs;
  for (auto _ : state) {
    auto report = flowgauge::cluster_duplicates(ds, variant);
    benchmark::DoNotOptimize(report.n_unique);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClusterDuplicates)->Args({100'000, 0})->Args({100'000, 1})->Unit(benchmark::kMillisecond);

}  // namespace
