#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "flowgauge/featurize.hpp"
#include "flowgauge/neighbor_index.hpp"
#include "flowgauge/splitter.hpp"

namespace flowgauge {

/// Features and labels for a subset of dataset rows.
struct LabeledMatrix {
  FeatureMatrix features;
  std::vector<std::string> labels;
};

LabeledMatrix featurize_rows(const Dataset& ds, std::span<const std::size_t> rows,
                             const ScalingConfig& cfg);

struct PlanEvaluation {
  std::vector<std::size_t> rows;  // dataset rows that were scored
  Evaluation evaluation;
};

/// Builds an index on the plan's train partition and scores `target`.
/// Throws UsageError when either partition is empty.
PlanEvaluation evaluate_plan(const Dataset& ds, const SplitPlan& plan, const ScalingConfig& cfg,
                             PredictMode mode, Partition target = Partition::Test,
                             std::size_t workers = 0);

}  // namespace flowgauge
