#include "flowgauge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "flowgauge/error.hpp"

namespace flowgauge {

namespace {

void check_pair(std::span<const std::string> preds, std::span<const std::string> truth) {
  if (preds.size() != truth.size()) throw UsageError("predictions and truth differ in length");
  if (truth.empty()) throw UsageError("no predictions to score");
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double accuracy(std::span<const std::string> preds, std::span<const std::string> truth) {
  check_pair(preds, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += preds[i] == truth[i];
  return ratio(hits, truth.size());
}

EvalResult weighted_f1(std::span<const std::string> preds, std::span<const std::string> truth) {
  check_pair(preds, truth);
  struct Counts {
    std::size_t tp = 0, predicted = 0, support = 0;
  };
  std::map<std::string, Counts> counts;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++counts[truth[i]].support;
    ++counts[preds[i]].predicted;
    if (preds[i] == truth[i]) {
      ++counts[truth[i]].tp;
      ++hits;
    }
  }

  EvalResult result;
  result.accuracy = ratio(hits, truth.size());
  double weighted = 0.0;
  for (const auto& [label, c] : counts) {
    ClassMetrics m;
    m.precision = ratio(c.tp, c.predicted);
    m.recall = ratio(c.tp, c.support);
    m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.support = c.support;
    weighted += m.f1 * static_cast<double>(c.support);
    result.per_class.emplace(label, m);
  }
  result.weighted_f1 = weighted / static_cast<double>(truth.size());
  return result;
}

double max_achievable_accuracy(const RedundancyReport& report) {
  if (report.n_total == 0) throw UsageError("max_achievable_accuracy: empty report");
  std::size_t correct = report.n_unique + report.n_same_class_dup;
  for (const auto& cluster : report.clusters) {
    if (cluster.mixed()) correct += cluster.majority_count();
  }
  return ratio(correct, report.n_total);
}

double minimal_fpr(const RedundancyReport& report, const std::set<std::string>& benign_labels) {
  std::size_t benign_total = 0;
  for (const auto& [label, count] : report.label_totals) {
    if (benign_labels.contains(label)) benign_total += count;
  }
  if (benign_total == 0) throw UsageError("minimal_fpr: dataset has no benign samples");

  std::size_t false_positives = 0;
  for (const auto& cluster : report.clusters) {
    std::size_t benign = 0;
    bool malicious = false;
    for (const auto& [label, count] : cluster.label_counts) {
      if (benign_labels.contains(label)) {
        benign += count;
      } else {
        malicious = true;
      }
    }
    if (malicious) false_positives += benign;
  }
  return ratio(false_positives, benign_total);
}

std::vector<double> mean_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share the mean of ranks i+1..j+1
    const double rank = (static_cast<double>(i + j) + 2.0) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("spearman: inputs differ in length");
  if (x.size() < 3) throw UsageError("spearman: need at least 3 observations");
  for (double v : x) {
    if (std::isnan(v)) throw UsageError("spearman: NaN input");
  }
  for (double v : y) {
    if (std::isnan(v)) throw UsageError("spearman: NaN input");
  }

  const auto rx = mean_ranks(x);
  const auto ry = mean_ranks(y);
  const auto n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;  // mean rank is fixed under mean-rank ties
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw UsageError("spearman: constant input has no rank variance");

  CorrelationResult result;
  result.n = x.size();
  result.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = n - 2.0;
  const double denom = 1.0 - result.rho * result.rho;
  if (denom <= 0) {
    result.p_value = 0.0;
  } else {
    const double t = std::fabs(result.rho) * std::sqrt(df / denom);
    boost::math::students_t dist(df);
    result.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
  }
  return result;
}

double gap(double best_baseline, double max_acc) { return max_acc - best_baseline; }

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw UsageError("mean_std: no values");
  MeanStd out;
  out.n = values.size();
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(out.n);
  if (out.n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(out.n - 1));
  }
  return out;
}

void to_json(nlohmann::json& j, const ClassMetrics& m) {
  j = nlohmann::json{
      {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

void to_json(nlohmann::json& j, const EvalResult& r) {
  j = nlohmann::json{{"accuracy", r.accuracy}, {"weighted_f1", r.weighted_f1}, {"per_class", r.per_class}};
}

void to_json(nlohmann::json& j, const CorrelationResult& r) {
  j = nlohmann::json{{"rho", r.rho}, {"p_value", r.p_value}, {"n", r.n}};
}

void to_json(nlohmann::json& j, const MeanStd& m) {
  j = nlohmann::json{{"mean", m.mean}, {"n", m.n}};
  j["std"] = m.stddev ? nlohmann::json(*m.stddev) : nlohmann::json(nullptr);
}

}  // namespace flowgauge
