#include <benchmark/benchmark.h>

#include <map>

#include "flowgauge/neighbor_index.hpp"
#include "support/generators.hpp"

namespace {

struct Fixture {
  flowgauge::FeatureMatrix train;
  std::vector<std::string> labels;
  flowgauge::FeatureMatrix queries;
};

// Template-structured flows at width 90 (N = 30 with IPTs).
const Fixture& fixture(std::size_t n_train) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(n_train);
  if (it != cache.end()) return it->second;
  flowgauge::ScalingConfig cfg = flowgauge::default_config();
  cfg.n_packets = 30;
  const auto flows = flowgauge::testing::template_flows(7, n_train + 1000, 50);
  Fixture f{flowgauge::FeatureMatrix(cfg.width()), {}, flowgauge::FeatureMatrix(cfg.width())};
  for (std::size_t i = 0; i < flows.size(); ++i) {
    std::vector<double> row(cfg.width());
    flowgauge::featurize_into(flows[i], cfg, row);
    if (i < n_train) {
      f.train.push_back(row);
      f.labels.push_back(flows[i].label);
    } else {
      f.queries.push_back(row);
    }
  }
  return cache.emplace(n_train, std::move(f)).first->second;
}

void BM_Build(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto index = flowgauge::NeighborIndex::build(f.train, f.labels);
    benchmark::DoNotOptimize(index.size());
  }
}
BENCHMARK(BM_Build)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_PredictTop1(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto index = flowgauge::NeighborIndex::build(f.train, f.labels);
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.predict_top1(f.queries.row(q)));
    q = (q + 1) % f.queries.rows();
  }
}
BENCHMARK(BM_PredictTop1)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMicrosecond);

void BM_PredictVote(benchmark::State& state) {
  const auto& f = fixture(10'000);
  const auto index = flowgauge::NeighborIndex::build(f.train, f.labels);
  const flowgauge::VotingConfig voting{static_cast<double>(state.range(0))};
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.predict_vote(f.queries.row(q), voting));
    q = (q + 1) % f.queries.rows();
  }
}
BENCHMARK(BM_PredictVote)->Arg(0)->Arg(500)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_LinearScan(benchmark::State& state) {
  const auto& f = fixture(10'000);
  std::size_t q = 0;
  for (auto _ : state) {
    double best = 1e300;
    for (std::size_t r = 0; r < f.train.rows(); ++r) {
      best = std::min(best, flowgauge::l1_distance(f.train.row(r), f.queries.row(q)));
    }
    benchmark::DoNotOptimize(best);
    q = (q + 1) % f.queries.rows();
  }
}
BENCHMARK(BM_LinearScan)->Unit(benchmark::kMicrosecond);

}  // namespace
