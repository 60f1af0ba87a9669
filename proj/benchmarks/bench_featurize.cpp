#include <benchmark/benchmark.h>

#include "flowgauge/featurize.hpp"
#include "flowgauge/neighbor_index.hpp"
#include "support/generators.hpp"

namespace {

void BM_FeaturizeAll(benchmark::State& state) {
  const auto flows = flowgauge::testing::template_flows(1, static_cast<std::size_t>(state.range(0)), 20);
  flowgauge::ScalingConfig cfg = flowgauge::default_config();
  cfg.n_packets = 30;
  for (auto _ : state) {
    auto m = flowgauge::featurize_all(flows, cfg);
    benchmark::DoNotOptimize(m.data().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FeaturizeAll)->Arg(10'000)->Arg(100'000);

void BM_L1Distance(benchmark::State& state) {
  flowgauge::testing::TestRng rng(2);
  const auto m = flowgauge::testing::random_matrix(rng, 2, static_cast<std::size_t>(state.range(0)), 1500);
  for (auto _ : state) benchmark::DoNotOptimize(flowgauge::l1_distance(m.row(0), m.row(1)));
}
BENCHMARK(BM_L1Distance)->Arg(30)->Arg(90);

}  // namespace
