#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgauge/flow.hpp"

namespace flowgauge {

enum class Partition : std::uint8_t { Train, Val, Test, Excluded };
enum class SplitStrategy { Random, Time, DisjointKey, Fixed };

std::string_view to_string(Partition p);
Partition partition_from_string(std::string_view text);
std::string_view to_string(SplitStrategy s);

/// Train/validation/test fractions; must lie in [0, 1] and sum to 1.
struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;

  void validate() const;
  std::array<double, 3> as_array() const { return {train, val, test}; }
};

struct Assignment {
  std::string flow_id;
  Partition partition = Partition::Train;
};

/// Assignment of every dataset flow (dataset order) to one partition.
/// Flows outside a time split's windows are marked Excluded.
struct SplitPlan {
  SplitStrategy strategy = SplitStrategy::Random;
  std::uint64_t seed = 0;
  std::vector<Assignment> assignment;
  nlohmann::json params = nlohmann::json::object();

  /// Dataset row indices in partition p, ascending.
  std::vector<std::size_t> indices(Partition p) const;
  std::size_t count(Partition p) const;
  /// Realized share of assigned (non-excluded) flows per partition.
  std::array<double, 3> realized_fractions() const;
};

/// Shuffles flows by seed. Val and test get floor(n * fraction) flows, the
/// remainder goes to train; a partition with a nonzero fraction that would
/// be empty borrows one flow from train when train can spare it.
SplitPlan random_split(const Dataset& ds, const SplitFractions& fracs, std::uint64_t seed);

struct TimeBoundaries {
  std::int64_t train_end = 0;
  std::int64_t test_start = 0;
  std::int64_t test_end = 0;
};

/// Train = ts < train_end, test = test_start <= ts < test_end. When
/// val_fraction > 0, the latest floor(n_train * val_fraction) training
/// flows become validation. Other flows are Excluded.
SplitPlan time_split(const Dataset& ds, const TimeBoundaries& bounds, double val_fraction = 0.0);

/// One plan per consecutive test window [edges[i], edges[i+1]) after a
/// shared training window ending at train_end.
std::vector<SplitPlan> time_split_windows(const Dataset& ds, std::int64_t train_end,
                                          std::span<const std::int64_t> test_edges,
                                          double val_fraction = 0.0);

enum class KeyField { Src, Dst };
std::string_view to_string(KeyField k);
KeyField key_field_from_string(std::string_view text);

using KeyFunction = std::function<std::string(const FlowRecord&)>;
KeyFunction key_function(KeyField field);

/// Shuffles distinct key values by seed and fills train, then val, then
/// test, moving on once a partition's flow share reaches its fraction. No
/// key value spans two partitions.
SplitPlan disjoint_key_split(const Dataset& ds, const KeyFunction& key_of,
                             const SplitFractions& fracs, std::uint64_t seed);
SplitPlan disjoint_key_split(const Dataset& ds, KeyField field, const SplitFractions& fracs,
                             std::uint64_t seed);

/// Plan from `flow_id,partition` text. Throws DataError naming the first
/// missing, duplicated, or unknown id.
SplitPlan fixed_split_text(const Dataset& ds, std::string_view plan_csv);
SplitPlan fixed_split(const Dataset& ds, const std::filesystem::path& assignment_file);

std::string plan_csv(const SplitPlan& plan);
void write_plan(const std::filesystem::path& path, const SplitPlan& plan);

struct RepeatedSplits {
  std::vector<SplitPlan> plans;
  std::size_t n_reps() const { return plans.size(); }
};

/// Plan k is built with seed base_seed + k.
RepeatedSplits repeat(const std::function<SplitPlan(std::uint64_t)>& make_plan, std::size_t n_reps,
                      std::uint64_t base_seed);

/// Checks totality and exclusivity against ds plus the strategy's own
/// invariant; returns a description of the first problem or an empty
/// string. `key_of` is consulted for disjoint-key plans.
std::string verify_plan(const Dataset& ds, const SplitPlan& plan, const KeyFunction& key_of = {});

}  // namespace flowgauge
