#include "flowgauge/pipeline.hpp"

#include "flowgauge/error.hpp"

namespace flowgauge {

LabeledMatrix featurize_rows(const Dataset& ds, std::span<const std::size_t> rows,
                             const ScalingConfig& cfg) {
  cfg.validate();
  LabeledMatrix out{FeatureMatrix(cfg.width()), {}};
  out.features.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (auto i : rows) {
    featurize_into(ds[i], cfg, out.features.append_row());
    out.labels.push_back(ds[i].label);
  }
  return out;
}

PlanEvaluation evaluate_plan(const Dataset& ds, const SplitPlan& plan, const ScalingConfig& cfg,
                             PredictMode mode, Partition target, std::size_t workers) {
  if (plan.assignment.size() != ds.size()) throw UsageError("split plan does not match dataset");
  const auto train_rows = plan.indices(Partition::Train);
  if (train_rows.empty()) throw UsageError("split plan has an empty train partition");
  PlanEvaluation out;
  out.rows = plan.indices(target);
  if (out.rows.empty()) {
    throw UsageError("split plan has an empty " + std::string(to_string(target)) + " partition");
  }
  const auto train = featurize_rows(ds, train_rows, cfg);
  const auto index = NeighborIndex::build(train.features, train.labels, cfg);
  const auto scored = featurize_rows(ds, out.rows, cfg);
  out.evaluation = evaluate(index, scored.features, scored.labels, mode, workers);
  return out;
}

}  // namespace flowgauge
