#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "flowgauge/redundancy.hpp"

namespace flowgauge {

// All metrics are fractions in [0, 1]; reports scale to percent.

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;

  bool operator==(const ClassMetrics&) const = default;
};

struct EvalResult {
  double accuracy = 0;
  double weighted_f1 = 0;
  std::map<std::string, ClassMetrics> per_class;
};

/// Fraction of positions where preds[i] == truth[i]. Throws UsageError on
/// empty or unequal inputs.
double accuracy(std::span<const std::string> preds, std::span<const std::string> truth);

/// Accuracy, per-class precision/recall/F1, and the support-weighted F1.
/// Labels predicted but absent from truth get support 0; undefined ratios
/// are 0.
EvalResult weighted_f1(std::span<const std::string> preds, std::span<const std::string> truth);

/// Upper bound on accuracy for any classifier that is a function of the
/// canonical key: unique and same-class duplicates count fully, each mixed
/// cluster contributes its majority count.
double max_achievable_accuracy(const RedundancyReport& report);

/// Lower bound on FPR when every cluster containing a malicious sample is
/// flagged malicious. Labels outside `benign_labels` are malicious. Throws
/// UsageError when the dataset has no benign samples.
double minimal_fpr(const RedundancyReport& report, const std::set<std::string>& benign_labels);

struct CorrelationResult {
  double rho = 0;
  double p_value = 1;
  std::size_t n = 0;
};

/// Spearman rank correlation (mean ranks for ties) with a two-sided p-value
/// from the t approximation on n - 2 degrees of freedom. Throws UsageError
/// for n < 3 or constant ranks.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

/// Mean ranks (1-based) with ties sharing their average rank.
std::vector<double> mean_ranks(std::span<const double> values);

/// max_acc - best_baseline, both in percent.
double gap(double best_baseline, double max_acc);

struct MeanStd {
  double mean = 0;
  std::optional<double> stddev;  // sample std; absent for n < 2
  std::size_t n = 0;
};

MeanStd mean_std(std::span<const double> values);

void to_json(nlohmann::json& j, const ClassMetrics& m);
void to_json(nlohmann::json& j, const EvalResult& r);
void to_json(nlohmann::json& j, const CorrelationResult& r);
void to_json(nlohmann::json& j, const MeanStd& m);

}  // namespace flowgauge
