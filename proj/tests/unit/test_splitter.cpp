#include <gtest/gtest.h>

#include <map>
#include <set>

#include "flowgauge/error.hpp"
#include "flowgauge/splitter.hpp"
#include "support/generators.hpp"

using namespace flowgauge;
namespace ft = flowgauge::testing;
using ft::make_flow;

namespace {

Dataset numbered(std::size_t n, std::int64_t ts0 = 1) {
  std::vector<FlowRecord> flows;
  for (std::size_t i = 0; i < n; ++i) {
    flows.push_back(make_flow("f" + std::to_string(i), "A", {1}, {1}, {0}, ts0 + static_cast<std::int64_t>(i),
                              "s" + std::to_string(i % 7), "d" + std::to_string(i % 3)));
  }
  return Dataset("n", flows);
}

std::set<std::string> ids_in(const Dataset& ds, const SplitPlan& plan, Partition p) {
  std::set<std::string> out;
  for (auto i : plan.indices(p)) out.insert(ds[i].id);
  return out;
}

}  // namespace

TEST(RandomSplit, SixTwoTwo) {
  auto ds = numbered(10);
  auto plan = random_split(ds, {0.6, 0.2, 0.2}, 42);
  EXPECT_EQ(plan.count(Partition::Train), 6u);
  EXPECT_EQ(plan.count(Partition::Val), 2u);
  EXPECT_EQ(plan.count(Partition::Test), 2u);
  EXPECT_EQ(verify_plan(ds, plan), "");
  EXPECT_EQ(plan.strategy, SplitStrategy::Random);
  EXPECT_EQ(plan.seed, 42u);
}

TEST(RandomSplit, DeterministicPerSeed) {
  auto ds = numbered(100);
  auto a = random_split(ds, {0.5, 0.25, 0.25}, 7);
  auto b = random_split(ds, {0.5, 0.25, 0.25}, 7);
  auto c = random_split(ds, {0.5, 0.25, 0.25}, 8);
  EXPECT_EQ(plan_csv(a), plan_csv(b));
  EXPECT_NE(plan_csv(a), plan_csv(c));
}

TEST(RandomSplit, AllTrainAndBadFractions) {
  auto ds = numbered(9);
  auto plan = random_split(ds, {1, 0, 0}, 1);
  EXPECT_EQ(plan.count(Partition::Train), 9u);
  EXPECT_THROW(random_split(ds, {0.5, 0.5, 0.5}, 1), UsageError);
  EXPECT_THROW(random_split(ds, {1.2, -0.1, -0.1}, 1), UsageError);
}

TEST(RandomSplit, FloorThenRemainderToTrain) {
  auto ds = numbered(17);
  auto plan = random_split(ds, {0.6, 0.2, 0.2}, 3);
  EXPECT_EQ(plan.count(Partition::Val), 3u);
  EXPECT_EQ(plan.count(Partition::Test), 3u);
  EXPECT_EQ(plan.count(Partition::Train), 11u);
}

TEST(TimeSplit, Example) {
  auto ds = numbered(10);  // ts 1..10
  auto plan = time_split(ds, {7, 7, 11});
  std::set<std::int64_t> train, test;
  for (auto i : plan.indices(Partition::Train)) train.insert(ds[i].ts_ms);
  for (auto i : plan.indices(Partition::Test)) test.insert(ds[i].ts_ms);
  EXPECT_EQ(train, (std::set<std::int64_t>{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(test, (std::set<std::int64_t>{7, 8, 9, 10}));
  EXPECT_EQ(verify_plan(ds, plan), "");
}

TEST(TimeSplit, ValidationComesFromTheTrainTail) {
  auto ds = numbered(20);  // ts 1..20
  auto plan = time_split(ds, {11, 15, 19}, 0.2);
  std::set<std::int64_t> val;
  for (auto i : plan.indices(Partition::Val)) val.insert(ds[i].ts_ms);
  EXPECT_EQ(val, (std::set<std::int64_t>{9, 10}));
  EXPECT_EQ(plan.count(Partition::Train), 8u);
  EXPECT_EQ(plan.count(Partition::Test), 4u);
  EXPECT_EQ(plan.count(Partition::Excluded), 6u);
  EXPECT_EQ(plan.params["n_excluded"], 6);
}

TEST(TimeSplit, BadBoundaries) {
  auto ds = numbered(5);
  EXPECT_THROW(time_split(ds, {5, 4, 10}), UsageError);
  EXPECT_THROW(time_split(ds, {5, 6, 6}), UsageError);
}

TEST(TimeSplit, WindowsGiveOnePlanEach) {
  auto ds = numbered(40);
  std::vector<std::int64_t> edges{21, 28, 35, 42};
  auto plans = time_split_windows(ds, 21, edges);
  ASSERT_EQ(plans.size(), 3u);
  EXPECT_EQ(plans[0].count(Partition::Test), 7u);
  EXPECT_EQ(plans[2].count(Partition::Test), 6u);
  for (const auto& p : plans) {
    EXPECT_EQ(p.count(Partition::Train), 20u);
    EXPECT_EQ(verify_plan(ds, p), "");
  }
}

TEST(DisjointKeySplit, ThreeKeysThreeThirds) {
  Dataset ds("k", {make_flow("1", "A", {1}, {1}, {0}, 0, "a"), make_flow("2", "A", {1}, {1}, {0}, 0, "b"),
                   make_flow("3", "A", {1}, {1}, {0}, 0, "c")});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto plan = disjoint_key_split(ds, KeyField::Src, {1.0 / 3, 1.0 / 3, 1.0 / 3}, seed);
    EXPECT_EQ(plan.count(Partition::Train), 1u);
    EXPECT_EQ(plan.count(Partition::Val), 1u);
    EXPECT_EQ(plan.count(Partition::Test), 1u);
  }
  Dataset two("k", {make_flow("1", "A", {1}, {1}, {0}, 0, "a"), make_flow("2", "A", {1}, {1}, {0}, 0, "b")});
  EXPECT_THROW(disjoint_key_split(two, KeyField::Src, {0.6, 0.2, 0.2}, 1), UsageError);
}

TEST(DisjointKeySplit, KeysNeverSpanPartitions) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto ds = ft::planted_corpus(seed, {.n_flows = 300});
    for (auto field : {KeyField::Src, KeyField::Dst}) {
      auto plan = disjoint_key_split(ds, field, {0.6, 0.2, 0.2}, seed);
      EXPECT_EQ(verify_plan(ds, plan, key_function(field)), "");
      std::map<std::string, std::set<Partition>> seen;
      for (std::size_t i = 0; i < ds.size(); ++i) seen[key_function(field)(ds[i])].insert(plan.assignment[i].partition);
      for (const auto& [k, parts] : seen) EXPECT_EQ(parts.size(), 1u) << k;
    }
  }
}

TEST(DisjointKeySplit, SkewedKeyLandsInOnePartition) {
  std::vector<FlowRecord> flows;
  for (int i = 0; i < 90; ++i) flows.push_back(make_flow("h" + std::to_string(i), "A", {1}, {1}, {0}, 0, "heavy"));
  for (int i = 0; i < 10; ++i) flows.push_back(make_flow("l" + std::to_string(i), "A", {1}, {1}, {0}, 0, "k" + std::to_string(i)));
  Dataset ds("skew", flows);
  auto plan = disjoint_key_split(ds, KeyField::Src, {0.6, 0.2, 0.2}, 5);
  std::set<Partition> heavy;
  for (int i = 0; i < 90; ++i) heavy.insert(plan.assignment[static_cast<std::size_t>(i)].partition);
  EXPECT_EQ(heavy.size(), 1u);
  const auto realized = plan.realized_fractions();
  const auto reported = plan.params["realized_fracs"];
  for (std::size_t k = 0; k < 3; ++k) {
    const auto p = std::array{Partition::Train, Partition::Val, Partition::Test}[k];
    EXPECT_DOUBLE_EQ(realized[k], plan.count(p) / 100.0);
    EXPECT_DOUBLE_EQ(reported[k].get<double>(), realized[k]);
  }
  EXPECT_GT(plan.count(Partition::Val), 0u);
  EXPECT_GT(plan.count(Partition::Test), 0u);
}

TEST(FixedSplit, MirrorsFileAndNamesBadIds) {
  auto ds = numbered(4);
  const std::string good = "flow_id,partition\nf0,train\nf1,val\nf2,test\nf3,train\n";
  auto plan = fixed_split_text(ds, good);
  EXPECT_EQ(plan_csv(plan), good);
  EXPECT_EQ(plan.strategy, SplitStrategy::Fixed);

  auto message = [&](const std::string& text) {
    try {
      fixed_split_text(ds, text);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("flow_id,partition\nf0,train\nf1,val\nf2,test\n").find("f3"), std::string::npos);
  EXPECT_NE(message(good + "zz,train\n").find("zz"), std::string::npos);
  EXPECT_NE(message(good + "f1,test\n").find("f1"), std::string::npos);
  EXPECT_NE(message("flow_id,partition\nf0,train\nf1,bogus\nf2,test\nf3,train\n").find("bogus"), std::string::npos);
  EXPECT_NE(message("id,part\n"), "no error");

  auto path = std::filesystem::temp_directory_path() / "flowgauge_plan_test.csv";
  write_plan(path, plan);
  EXPECT_EQ(plan_csv(fixed_split(ds, path)), good);
}

TEST(Repeat, SeedsAreConsecutive) {
  auto ds = numbered(30);
  auto reps = repeat([&](std::uint64_t s) { return random_split(ds, {}, s); }, 5, 100);
  ASSERT_EQ(reps.n_reps(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(reps.plans[k].seed, 100 + k);
    EXPECT_EQ(plan_csv(reps.plans[k]), plan_csv(random_split(ds, {}, 100 + k)));
  }
  EXPECT_EQ(repeat([&](std::uint64_t s) { return random_split(ds, {}, s); }, 1, 0).n_reps(), 1u);
  EXPECT_THROW(repeat([&](std::uint64_t s) { return random_split(ds, {}, s); }, 0, 0), UsageError);
}

TEST(VerifyPlan, DetectsProblems) {
  auto ds = numbered(10);
  auto plan = time_split(ds, {6, 6, 11});
  plan.assignment[9].partition = Partition::Train;
  EXPECT_NE(verify_plan(ds, plan), "");
  auto dk = disjoint_key_split(ds, KeyField::Src, {0.6, 0.2, 0.2}, 0);
  // f0 and f7 share src key s0.
  dk.assignment[7].partition = dk.assignment[0].partition == Partition::Train ? Partition::Test : Partition::Train;
  EXPECT_NE(verify_plan(ds, dk, key_function(KeyField::Src)), "");
  auto short_plan = random_split(ds, {}, 0);
  short_plan.assignment.pop_back();
  EXPECT_NE(verify_plan(ds, short_plan), "");
}

TEST(Partition, StringForms) {
  for (auto p : {Partition::Train, Partition::Val, Partition::Test, Partition::Excluded}) {
    EXPECT_EQ(partition_from_string(to_string(p)), p);
  }
  EXPECT_THROW(partition_from_string("nope"), DataError);
  EXPECT_EQ(key_field_from_string("dst_key"), KeyField::Dst);
  EXPECT_THROW(key_field_from_string("port"), UsageError);
}
