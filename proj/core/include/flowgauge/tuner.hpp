#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgauge/featurize.hpp"
#include "flowgauge/random.hpp"
#include "flowgauge/splitter.hpp"

namespace flowgauge {

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct RealRange {
  double lo = 0;
  double hi = 0;
};

/// Bounds for the baseline's hyperparameters. Defaults contain every
/// published per-dataset optimum.
struct SearchSpace {
  IntRange n_packets{1, 30};
  RealRange dir_scale{0.0, 300.0};
  RealRange ipt_scale{0.0, 1.0};
  RealRange ipt_maxclip{100.0, 5000.0};
  std::vector<bool> use_ipt{true, false};

  void validate() const;

  /// Draws n_packets, dir_scale, ipt_scale, ipt_maxclip, use_ipt in that
  /// order. Everything is uniform except ipt_scale, which is log-uniform
  /// over [max(lo, kLogFloor), hi].
  ScalingConfig sample(Rng& rng) const;

  /// Space containing exactly one configuration.
  static SearchSpace point(const ScalingConfig& cfg);

  static constexpr double kLogFloor = 1e-3;
};

void to_json(nlohmann::json& j, const SearchSpace& space);
/// Missing fields keep their defaults.
void from_json(const nlohmann::json& j, SearchSpace& space);

struct TrialResult {
  std::size_t trial = 0;
  ScalingConfig cfg;
  std::vector<double> per_rep;
  double mean_val_accuracy = 0;
};

void to_json(nlohmann::json& j, const TrialResult& t);
void from_json(const nlohmann::json& j, TrialResult& t);

/// Reads a JSONL trial log. Throws DataError on malformed lines.
std::vector<TrialResult> read_trial_log(const std::filesystem::path& path);

/// Configuration trial `trial` draws; independent of other trials, so a
/// resumed run samples exactly what a fresh run would.
ScalingConfig trial_config(const SearchSpace& space, std::uint64_t seed, std::size_t trial);

struct TuneOptions {
  std::size_t budget = 200;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  /// Trials already completed (indices 0..k-1); tuning continues at k.
  std::vector<TrialResult> resume;
  /// Called after each newly run trial, in trial order.
  std::function<void(const TrialResult&)> on_trial;
};

struct TuneResult {
  TrialResult best;
  std::vector<TrialResult> trials;
};

/// Mean validation accuracy of cfg over the plans (top-1 mode).
TrialResult score_config(const Dataset& ds, const RepeatedSplits& splits, const ScalingConfig& cfg,
                         std::size_t workers = 0);

/// Runs `budget` trials and returns the highest-scoring one (earliest on
/// ties) with the full log. Throws UsageError when a plan has an empty
/// train or validation partition, on budget 0, or when a resume log does
/// not match this seed and space.
TuneResult tune(const Dataset& ds, const RepeatedSplits& splits, const SearchSpace& space,
                const TuneOptions& options);

struct VotingTuneResult {
  double best_t_maj = 0;
  std::vector<std::pair<double, double>> accuracies;  // (threshold, mean val accuracy)
};

/// Scores predict_vote on validation for each threshold; ties go to the
/// smallest threshold.
VotingTuneResult tune_voting(const Dataset& ds, const RepeatedSplits& splits, const ScalingConfig& cfg,
                             std::span<const double> thresholds, std::size_t workers = 0);

}  // namespace flowgauge
