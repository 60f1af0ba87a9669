#include "flowgauge/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowgauge/csv.hpp"
#include "flowgauge/error.hpp"
#include "flowgauge/ingest.hpp"
#include "flowgauge/pipeline.hpp"

namespace flowgauge {

namespace {

double uniform_in(Rng& rng, RealRange r) {
  if (r.lo == r.hi) {
    rng();  // keep the draw count fixed
    return r.lo;
  }
  return r.lo + (r.hi - r.lo) * uniform_unit(rng);
}

double log_uniform_in(Rng& rng, RealRange r) {
  const double lo = std::max(r.lo, SearchSpace::kLogFloor);
  if (lo >= r.hi) return uniform_in(rng, r);
  return std::exp(std::log(lo) + (std::log(r.hi) - std::log(lo)) * uniform_unit(rng));
}

void check_real(const RealRange& r, const char* name, bool positive) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi || r.lo < 0 || (positive && r.lo <= 0)) {
    throw UsageError(std::string("bad search range for ") + name);
  }
}

void check_splits(const RepeatedSplits& splits) {
  if (splits.plans.empty()) throw UsageError("tuning needs at least one split plan");
  for (const auto& plan : splits.plans) {
    if (plan.count(Partition::Val) == 0) throw UsageError("split plan has an empty validation set");
    if (plan.count(Partition::Train) == 0) throw UsageError("split plan has an empty train set");
  }
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void SearchSpace::validate() const {
  if (n_packets.lo < 1 || n_packets.hi > static_cast<int>(kCaptureCap) || n_packets.lo > n_packets.hi) {
    throw UsageError("n_packets range must lie within [1, 30]");
  }
  check_real(dir_scale, "dir_scale", false);
  check_real(ipt_scale, "ipt_scale", false);
  check_real(ipt_maxclip, "ipt_maxclip", true);
  if (use_ipt.empty()) throw UsageError("use_ipt choices must not be empty");
}

ScalingConfig SearchSpace::sample(Rng& rng) const {
  ScalingConfig cfg;
  cfg.n_packets = n_packets.lo + static_cast<int>(uniform_below(
                                     rng, static_cast<std::uint64_t>(n_packets.hi - n_packets.lo + 1)));
  cfg.dir_scale = uniform_in(rng, dir_scale);
  cfg.ipt_scale = log_uniform_in(rng, ipt_scale);
  cfg.ipt_maxclip = uniform_in(rng, ipt_maxclip);
  cfg.use_ipt = use_ipt[static_cast<std::size_t>(uniform_below(rng, use_ipt.size()))];
  return cfg;
}

SearchSpace SearchSpace::point(const ScalingConfig& cfg) {
  SearchSpace s;
  s.n_packets = {cfg.n_packets, cfg.n_packets};
  s.dir_scale = {cfg.dir_scale, cfg.dir_scale};
  s.ipt_scale = {cfg.ipt_scale, cfg.ipt_scale};
  s.ipt_maxclip = {cfg.ipt_maxclip, cfg.ipt_maxclip};
  s.use_ipt = {cfg.use_ipt};
  return s;
}

void to_json(nlohmann::json& j, const SearchSpace& s) {
  j = nlohmann::json{{"n_packets", {s.n_packets.lo, s.n_packets.hi}},
                     {"dir_scale", {s.dir_scale.lo, s.dir_scale.hi}},
                     {"ipt_scale", {s.ipt_scale.lo, s.ipt_scale.hi}},
                     {"ipt_maxclip", {s.ipt_maxclip.lo, s.ipt_maxclip.hi}},
                     {"use_ipt", s.use_ipt}};
}

void from_json(const nlohmann::json& j, SearchSpace& s) {
  try {
    SearchSpace out;
    auto range = [&](const char* name, auto& r) {
      if (auto it = j.find(name); it != j.end()) {
        if (!it->is_array() || it->size() != 2) throw UsageError(std::string(name) + " must be [lo, hi]");
        (*it)[0].get_to(r.lo);
        (*it)[1].get_to(r.hi);
      }
    };
    range("n_packets", out.n_packets);
    range("dir_scale", out.dir_scale);
    range("ipt_scale", out.ipt_scale);
    range("ipt_maxclip", out.ipt_maxclip);
    if (auto it = j.find("use_ipt"); it != j.end()) {
      out.use_ipt.clear();
      for (const auto& v : *it) out.use_ipt.push_back(v.get<bool>());
    }
    out.validate();
    s = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad search space: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const TrialResult& t) {
  j = nlohmann::json{
      {"trial", t.trial}, {"cfg", t.cfg}, {"per_rep", t.per_rep}, {"mean", t.mean_val_accuracy}};
}

void from_json(const nlohmann::json& j, TrialResult& t) {
  j.at("trial").get_to(t.trial);
  j.at("cfg").get_to(t.cfg);
  j.at("per_rep").get_to(t.per_rep);
  j.at("mean").get_to(t.mean_val_accuracy);
}

std::vector<TrialResult> read_trial_log(const std::filesystem::path& path) {
  std::vector<TrialResult> trials;
  std::size_t line_no = 0;
  csv::for_each_line(read_text_file(path), [&](std::string_view line) {
    ++line_no;
    if (line.empty()) return;
    try {
      trials.push_back(nlohmann::json::parse(line).get<TrialResult>());
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad trial record: " + e.what());
    }
  });
  return trials;
}

ScalingConfig trial_config(const SearchSpace& space, std::uint64_t seed, std::size_t trial) {
  Rng rng(mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(trial))));
  return space.sample(rng);
}

TrialResult score_config(const Dataset& ds, const RepeatedSplits& splits, const ScalingConfig& cfg,
                         std::size_t workers) {
  TrialResult result;
  result.cfg = cfg;
  for (const auto& plan : splits.plans) {
    auto scored = evaluate_plan(ds, plan, cfg, PredictMode::top1(), Partition::Val, workers);
    result.per_rep.push_back(scored.evaluation.metrics.accuracy);
  }
  result.mean_val_accuracy = mean_of(result.per_rep);
  return result;
}

TuneResult tune(const Dataset& ds, const RepeatedSplits& splits, const SearchSpace& space,
                const TuneOptions& options) {
  space.validate();
  check_splits(splits);
  if (options.budget == 0) throw UsageError("tuning budget must be >= 1");

  TuneResult out;
  for (const auto& t : options.resume) {
    if (out.trials.size() == options.budget) break;
    if (t.trial != out.trials.size() || t.cfg != trial_config(space, options.seed, t.trial)) {
      throw UsageError("resume log does not match this seed and search space at trial " +
                       std::to_string(t.trial));
    }
    out.trials.push_back(t);
  }
  for (std::size_t k = out.trials.size(); k < options.budget; ++k) {
    auto trial = score_config(ds, splits, trial_config(space, options.seed, k), options.workers);
    trial.trial = k;
    if (options.on_trial) options.on_trial(trial);
    out.trials.push_back(std::move(trial));
  }

  out.best = out.trials.front();
  for (const auto& t : out.trials) {
    if (t.mean_val_accuracy > out.best.mean_val_accuracy) out.best = t;
  }
  return out;
}

VotingTuneResult tune_voting(const Dataset& ds, const RepeatedSplits& splits, const ScalingConfig& cfg,
                             std::span<const double> thresholds, std::size_t workers) {
  check_splits(splits);
  if (thresholds.empty()) throw UsageError("need at least one voting threshold");
  for (double t : thresholds) {
    if (!(t >= 0)) throw UsageError("voting thresholds must be >= 0");
  }

  std::vector<double> sums(thresholds.size(), 0.0);
  for (const auto& plan : splits.plans) {
    const auto train_rows = plan.indices(Partition::Train);
    const auto val_rows = plan.indices(Partition::Val);
    const auto train = featurize_rows(ds, train_rows, cfg);
    const auto val = featurize_rows(ds, val_rows, cfg);
    const auto index = NeighborIndex::build(train.features, train.labels, cfg);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      auto eval = evaluate(index, val.features, val.labels, PredictMode::vote(thresholds[k]), workers);
      sums[k] += eval.metrics.accuracy;
    }
  }

  VotingTuneResult out;
  std::size_t best = 0;
  const auto reps = static_cast<double>(splits.plans.size());
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const double mean = sums[k] / reps;
    out.accuracies.emplace_back(thresholds[k], mean);
    const double best_mean = out.accuracies[best].second;
    if (mean > best_mean || (mean == best_mean && thresholds[k] < thresholds[best])) best = k;
  }
  out.best_t_maj = thresholds[best];
  return out;
}

}  // namespace flowgauge
