#include "flowgauge/redundancy.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

#include "flowgauge/error.hpp"
#include "flowgauge/ingest.hpp"

namespace flowgauge {

std::size_t DuplicateCluster::majority_count() const {
  std::size_t best = 0;
  for (const auto& [label, count] : label_counts) best = std::max(best, count);
  return best;
}

std::size_t RedundancyReport::n_mixed_clusters() const {
  return static_cast<std::size_t>(
      std::count_if(clusters.begin(), clusters.end(), [](const auto& c) { return c.mixed(); }));
}

RedundancyReport cluster_duplicates(const Dataset& ds, KeyVariant variant) {
  if (ds.empty()) throw UsageError("cluster_duplicates: dataset is empty");

  RedundancyReport report;
  report.variant = variant;
  report.n_total = ds.size();

  // Group flow indices by key, keeping groups in first-appearance order.
  std::unordered_map<CanonicalKey, std::size_t, CanonicalKeyHash> slot_of;
  slot_of.reserve(ds.size());
  std::vector<CanonicalKey> group_keys;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto key = canonical_key(ds[i], variant);
    auto [it, inserted] = slot_of.try_emplace(std::move(key), groups.size());
    if (inserted) {
      group_keys.push_back(it->first);
      groups.emplace_back();
    }
    groups[it->second].push_back(i);
    ++report.label_totals[ds[i].label];
  }

  report.membership.assign(ds.size(), DupClass::Unique);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    if (members.size() < 2) {
      ++report.n_unique;
      continue;
    }
    DuplicateCluster cluster;
    cluster.key = std::move(group_keys[g]);
    cluster.seq_len = cluster.key.length();
    cluster.member_ids.reserve(members.size());
    for (auto i : members) {
      cluster.member_ids.push_back(ds[i].id);
      ++cluster.label_counts[ds[i].label];
    }
    const auto cls = cluster.mixed() ? DupClass::Mixed : DupClass::SameClass;
    (cls == DupClass::Mixed ? report.n_mixed_dup : report.n_same_class_dup) += members.size();
    for (auto i : members) report.membership[i] = cls;
    report.clusters.push_back(std::move(cluster));
  }
  return report;
}

double redundancy_fraction(const RedundancyReport& report) {
  if (report.n_total == 0) throw UsageError("redundancy_fraction: empty report");
  return static_cast<double>(report.n_unique) / static_cast<double>(report.n_total);
}

namespace {

void check_matches(const RedundancyReport& report, const Dataset& ds) {
  if (report.n_total != ds.size() || report.membership.size() != ds.size()) {
    throw UsageError("redundancy report was not built from this dataset");
  }
}

using LengthCounts = std::array<std::size_t, kCaptureCap + 1>;

EcdfCurve make_curve(std::string population, const LengthCounts& counts) {
  EcdfCurve curve;
  curve.population = std::move(population);
  for (auto c : counts) curve.count += c;
  if (curve.count == 0) return curve;
  std::size_t running = 0;
  curve.values.reserve(kCaptureCap);
  for (std::size_t len = 1; len <= kCaptureCap; ++len) {
    running += counts[len];
    curve.values.push_back(static_cast<double>(running) / static_cast<double>(curve.count));
  }
  return curve;
}

}  // namespace

LengthEcdfs ecdf_by_length(const RedundancyReport& report, const Dataset& ds) {
  check_matches(report, ds);
  LengthCounts all{}, same{}, mixed{};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto len = ds[i].length();
    ++all[len];
    if (report.membership[i] == DupClass::SameClass) ++same[len];
    if (report.membership[i] == DupClass::Mixed) ++mixed[len];
  }
  return {make_curve("all", all), make_curve("same_class", same), make_curve("mixed", mixed)};
}

std::vector<HeatmapRow> heatmap_by_length(const RedundancyReport& report, const Dataset& ds) {
  check_matches(report, ds);
  LengthCounts all{}, same{}, mixed{};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto len = ds[i].length();
    ++all[len];
    if (report.membership[i] == DupClass::SameClass) ++same[len];
    if (report.membership[i] == DupClass::Mixed) ++mixed[len];
  }
  std::vector<HeatmapRow> rows;
  const auto total = static_cast<double>(ds.size());
  for (std::size_t len = 1; len <= kCaptureCap; ++len) {
    if (all[len] == 0) continue;
    const auto n = static_cast<double>(all[len]);
    rows.push_back({len, all[len], n / total, static_cast<double>(same[len]) / n,
                    static_cast<double>(mixed[len]) / n});
  }
  return rows;
}

void to_json(nlohmann::json& j, const RedundancyReport& report) {
  const auto total = static_cast<double>(report.n_total);
  const double unique_fraction = report.n_total ? static_cast<double>(report.n_unique) / total : 0.0;
  j = nlohmann::json{
      {"variant", to_string(report.variant)},
      {"n_total", report.n_total},
      {"n_unique", report.n_unique},
      {"n_same_class_dup", report.n_same_class_dup},
      {"n_mixed_dup", report.n_mixed_dup},
      {"n_clusters", report.clusters.size()},
      {"n_mixed_clusters", report.n_mixed_clusters()},
      {"unique_fraction", unique_fraction},
      {"duplicate_fraction", report.n_total ? 1.0 - unique_fraction : 0.0},
      {"same_class_dup_fraction",
       report.n_total ? static_cast<double>(report.n_same_class_dup) / total : 0.0},
      {"mixed_dup_fraction", report.n_total ? static_cast<double>(report.n_mixed_dup) / total : 0.0},
  };
}

std::string ecdf_csv(const LengthEcdfs& ecdfs) {
  std::string out = "curve,x,y\n";
  for (const auto* curve : {&ecdfs.all, &ecdfs.same_class, &ecdfs.mixed}) {
    for (std::size_t i = 0; i < curve->values.size(); ++i) {
      out += curve->population + ',' + std::to_string(i + 1) + ',' + format_real(curve->values[i]) +
             '\n';
    }
  }
  return out;
}

std::string heatmap_csv(
    const std::vector<std::pair<KeyVariant, std::vector<HeatmapRow>>>& tables) {
  std::string out = "variant,length,n_flows,sample_fraction,same_class_ratio,mixed_ratio\n";
  for (const auto& [variant, rows] : tables) {
    for (const auto& r : rows) {
      out += std::string(to_string(variant)) + ',' + std::to_string(r.length) + ',' +
             std::to_string(r.n_flows) + ',' + format_real(r.sample_fraction) + ',' +
             format_real(r.same_class_ratio) + ',' + format_real(r.mixed_ratio) + '\n';
    }
  }
  return out;
}

}  // namespace flowgauge
