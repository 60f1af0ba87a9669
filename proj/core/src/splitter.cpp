#include "flowgauge/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "flowgauge/csv.hpp"
#include "flowgauge/error.hpp"
#include "flowgauge/ingest.hpp"
#include "flowgauge/random.hpp"

namespace flowgauge {

namespace {

constexpr double kFractionTolerance = 1e-9;
constexpr std::array<Partition, 3> kPartitions = {Partition::Train, Partition::Val, Partition::Test};

std::size_t floor_share(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + kFractionTolerance));
}

SplitPlan plan_from_parts(const Dataset& ds, SplitStrategy strategy, std::uint64_t seed,
                          const std::vector<Partition>& parts) {
  SplitPlan plan;
  plan.strategy = strategy;
  plan.seed = seed;
  plan.assignment.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) plan.assignment.push_back({ds[i].id, parts[i]});
  return plan;
}

nlohmann::json fractions_json(const SplitFractions& f) { return {f.train, f.val, f.test}; }

}  // namespace

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::Train:
      return "train";
    case Partition::Val:
      return "val";
    case Partition::Test:
      return "test";
    case Partition::Excluded:
      return "excluded";
  }
  return "unknown";
}

Partition partition_from_string(std::string_view text) {
  if (text == "train") return Partition::Train;
  if (text == "val") return Partition::Val;
  if (text == "test") return Partition::Test;
  if (text == "excluded") return Partition::Excluded;
  throw DataError("unknown partition tag '" + std::string(text) + "'");
}

std::string_view to_string(SplitStrategy s) {
  switch (s) {
    case SplitStrategy::Random:
      return "random";
    case SplitStrategy::Time:
      return "time";
    case SplitStrategy::DisjointKey:
      return "disjoint_key";
    case SplitStrategy::Fixed:
      return "fixed";
  }
  return "unknown";
}

std::string_view to_string(KeyField k) { return k == KeyField::Src ? "src" : "dst"; }

KeyField key_field_from_string(std::string_view text) {
  if (text == "src" || text == "src_key") return KeyField::Src;
  if (text == "dst" || text == "dst_key") return KeyField::Dst;
  throw UsageError("key must be 'src' or 'dst', got '" + std::string(text) + "'");
}

KeyFunction key_function(KeyField field) {
  if (field == KeyField::Src) return [](const FlowRecord& f) { return f.src_key; };
  return [](const FlowRecord& f) { return f.dst_key; };
}

void SplitFractions::validate() const {
  for (double f : as_array()) {
    if (!(f >= 0.0 && f <= 1.0)) throw UsageError("split fractions must lie in [0, 1]");
  }
  if (std::fabs(train + val + test - 1.0) > kFractionTolerance) {
    throw UsageError("split fractions must sum to 1");
  }
}

std::vector<std::size_t> SplitPlan::indices(Partition p) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i].partition == p) out.push_back(i);
  }
  return out;
}

std::size_t SplitPlan::count(Partition p) const {
  return static_cast<std::size_t>(std::count_if(assignment.begin(), assignment.end(),
                                                [&](const auto& a) { return a.partition == p; }));
}

std::array<double, 3> SplitPlan::realized_fractions() const {
  std::array<double, 3> out{};
  const auto assigned = assignment.size() - count(Partition::Excluded);
  if (assigned == 0) return out;
  for (std::size_t k = 0; k < 3; ++k) {
    out[k] = static_cast<double>(count(kPartitions[k])) / static_cast<double>(assigned);
  }
  return out;
}

SplitPlan random_split(const Dataset& ds, const SplitFractions& fracs, std::uint64_t seed) {
  fracs.validate();
  const std::size_t n = ds.size();
  std::size_t n_val = floor_share(n, fracs.val);
  std::size_t n_test = floor_share(n, fracs.test);
  std::size_t n_train = n - n_val - n_test;
  const std::size_t train_floor = fracs.train > 0 ? 1 : 0;
  for (auto [fraction, count] : {std::pair{fracs.val, &n_val}, std::pair{fracs.test, &n_test}}) {
    if (fraction > 0 && *count == 0 && n_train > train_floor) {
      *count = 1;
      --n_train;
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(std::span(order), rng);

  std::vector<Partition> parts(n);
  for (std::size_t k = 0; k < n; ++k) {
    parts[order[k]] = k < n_train ? Partition::Train
                      : k < n_train + n_val ? Partition::Val
                                            : Partition::Test;
  }
  auto plan = plan_from_parts(ds, SplitStrategy::Random, seed, parts);
  plan.params = {{"fracs", fractions_json(fracs)}};
  return plan;
}

SplitPlan time_split(const Dataset& ds, const TimeBoundaries& bounds, double val_fraction) {
  if (!(bounds.train_end <= bounds.test_start && bounds.test_start < bounds.test_end)) {
    throw UsageError("time boundaries must satisfy train_end <= test_start < test_end");
  }
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw UsageError("val fraction must be in [0, 1)");

  std::vector<Partition> parts(ds.size(), Partition::Excluded);
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto ts = ds[i].ts_ms;
    if (ts < bounds.train_end) {
      parts[i] = Partition::Train;
      train.push_back(i);
    } else if (ts >= bounds.test_start && ts < bounds.test_end) {
      parts[i] = Partition::Test;
    }
  }

  std::size_t n_val = floor_share(train.size(), val_fraction);
  if (val_fraction > 0 && n_val == 0 && train.size() > 1) n_val = 1;
  std::stable_sort(train.begin(), train.end(),
                   [&](std::size_t a, std::size_t b) { return ds[a].ts_ms < ds[b].ts_ms; });
  for (std::size_t k = train.size() - n_val; k < train.size(); ++k) parts[train[k]] = Partition::Val;

  auto plan = plan_from_parts(ds, SplitStrategy::Time, 0, parts);
  plan.params = {{"train_end", bounds.train_end},
                 {"test_start", bounds.test_start},
                 {"test_end", bounds.test_end},
                 {"val_fraction", val_fraction},
                 {"n_excluded", plan.count(Partition::Excluded)}};
  return plan;
}

std::vector<SplitPlan> time_split_windows(const Dataset& ds, std::int64_t train_end,
                                          std::span<const std::int64_t> test_edges,
                                          double val_fraction) {
  if (test_edges.size() < 2) throw UsageError("need at least one test window (two edges)");
  std::vector<SplitPlan> plans;
  for (std::size_t i = 0; i + 1 < test_edges.size(); ++i) {
    plans.push_back(time_split(ds, {train_end, test_edges[i], test_edges[i + 1]}, val_fraction));
  }
  return plans;
}

SplitPlan disjoint_key_split(const Dataset& ds, const KeyFunction& key_of,
                             const SplitFractions& fracs, std::uint64_t seed) {
  fracs.validate();
  std::unordered_map<std::string, std::size_t> key_slot;
  std::vector<std::size_t> key_counts;
  std::vector<std::size_t> slot_of_flow(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto [it, inserted] = key_slot.try_emplace(key_of(ds[i]), key_counts.size());
    if (inserted) key_counts.push_back(0);
    ++key_counts[it->second];
    slot_of_flow[i] = it->second;
  }

  const auto fractions = fracs.as_array();
  std::vector<std::size_t> active;  // partitions with a nonzero fraction
  for (std::size_t k = 0; k < 3; ++k) {
    if (fractions[k] > 0) active.push_back(k);
  }
  if (key_counts.size() < active.size()) {
    throw UsageError("disjoint split needs at least " + std::to_string(active.size()) +
                     " distinct keys, found " + std::to_string(key_counts.size()));
  }

  std::vector<std::size_t> order(key_counts.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(std::span(order), rng);

  const auto n = static_cast<double>(ds.size());
  std::vector<Partition> part_of_key(key_counts.size());
  std::size_t current = 0;
  std::size_t filled = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    part_of_key[order[k]] = kPartitions[active[current]];
    filled += key_counts[order[k]];
    const std::size_t keys_left = order.size() - k - 1;
    const std::size_t partitions_left = active.size() - current - 1;
    if (partitions_left > 0 &&
        (static_cast<double>(filled) >= fractions[active[current]] * n - kFractionTolerance ||
         keys_left == partitions_left)) {
      ++current;
      filled = 0;
    }
  }

  std::vector<Partition> parts(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) parts[i] = part_of_key[slot_of_flow[i]];
  auto plan = plan_from_parts(ds, SplitStrategy::DisjointKey, seed, parts);
  const auto realized = plan.realized_fractions();
  plan.params = {{"fracs", fractions_json(fracs)},
                 {"realized_fracs", {realized[0], realized[1], realized[2]}},
                 {"n_keys", key_counts.size()}};
  return plan;
}

SplitPlan disjoint_key_split(const Dataset& ds, KeyField field, const SplitFractions& fracs,
                             std::uint64_t seed) {
  auto plan = disjoint_key_split(ds, key_function(field), fracs, seed);
  plan.params["key"] = to_string(field);
  return plan;
}

SplitPlan fixed_split_text(const Dataset& ds, std::string_view text) {
  std::unordered_map<std::string_view, std::size_t> row_of;
  row_of.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) row_of.emplace(ds[i].id, i);

  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<Partition> parts(ds.size());
  std::vector<std::size_t> seen_line(ds.size(), kUnset);
  bool header_seen = false;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  csv::for_each_line(text, [&](std::string_view line) {
    ++line_no;
    if (!header_seen) {
      if (line != "flow_id,partition") throw DataError("split plan must start with 'flow_id,partition'");
      header_seen = true;
      return;
    }
    if (line.empty()) return;
    if (!csv::split_line(line, fields) || fields.size() != 2) {
      throw DataError("malformed split plan line " + std::to_string(line_no));
    }
    auto it = row_of.find(fields[0]);
    if (it == row_of.end()) throw DataError("split plan names unknown flow id: " + fields[0]);
    if (seen_line[it->second] != kUnset) throw DataError("split plan duplicates flow id: " + fields[0]);
    seen_line[it->second] = line_no;
    parts[it->second] = partition_from_string(fields[1]);
  });
  if (!header_seen) throw DataError("split plan is empty");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (seen_line[i] == kUnset) throw DataError("split plan is missing flow id: " + ds[i].id);
  }
  return plan_from_parts(ds, SplitStrategy::Fixed, 0, parts);
}

SplitPlan fixed_split(const Dataset& ds, const std::filesystem::path& assignment_file) {
  auto plan = fixed_split_text(ds, read_text_file(assignment_file));
  plan.params = {{"file", assignment_file.string()}};
  return plan;
}

std::string plan_csv(const SplitPlan& plan) {
  std::string out = "flow_id,partition\n";
  for (const auto& a : plan.assignment) {
    out += csv::escape(a.flow_id);
    out += ',';
    out += to_string(a.partition);
    out += '\n';
  }
  return out;
}

void write_plan(const std::filesystem::path& path, const SplitPlan& plan) {
  write_text_file(path, plan_csv(plan));
}

RepeatedSplits repeat(const std::function<SplitPlan(std::uint64_t)>& make_plan, std::size_t n_reps,
                      std::uint64_t base_seed) {
  if (n_reps == 0) throw UsageError("repeat needs n_reps >= 1");
  RepeatedSplits out;
  out.plans.reserve(n_reps);
  for (std::size_t k = 0; k < n_reps; ++k) out.plans.push_back(make_plan(base_seed + k));
  return out;
}

std::string verify_plan(const Dataset& ds, const SplitPlan& plan, const KeyFunction& key_of) {
  if (plan.assignment.size() != ds.size()) return "plan covers a different number of flows";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (plan.assignment[i].flow_id != ds[i].id) return "plan row " + std::to_string(i) + " is not flow " + ds[i].id;
  }

  if (plan.strategy == SplitStrategy::Time) {
    std::int64_t max_train = std::numeric_limits<std::int64_t>::min();
    std::int64_t min_test = std::numeric_limits<std::int64_t>::max();
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto p = plan.assignment[i].partition;
      if (p == Partition::Train || p == Partition::Val) max_train = std::max(max_train, ds[i].ts_ms);
      if (p == Partition::Test) min_test = std::min(min_test, ds[i].ts_ms);
    }
    if (max_train >= min_test) return "a training flow does not precede every test flow";
  }

  if (plan.strategy == SplitStrategy::DisjointKey && key_of) {
    std::unordered_map<std::string, Partition> owner;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto p = plan.assignment[i].partition;
      auto [it, inserted] = owner.try_emplace(key_of(ds[i]), p);
      if (!inserted && it->second != p) return "key '" + it->first + "' spans two partitions";
    }
  }
  return {};
}

}  // namespace flowgauge
