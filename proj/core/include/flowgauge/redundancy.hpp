#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgauge/flow.hpp"

namespace flowgauge {

/// Where a flow falls in the duplicate accounting.
enum class DupClass : std::uint8_t { Unique, SameClass, Mixed };

/// Two or more flows with the same canonical key.
struct DuplicateCluster {
  CanonicalKey key;
  std::vector<std::string> member_ids;  // dataset order
  std::map<std::string, std::size_t> label_counts;
  std::size_t seq_len = 0;

  std::size_t size() const { return member_ids.size(); }
  bool mixed() const { return label_counts.size() >= 2; }
  /// Count of the most frequent label (shared maximum on ties).
  std::size_t majority_count() const;
};

/// Dataset-level duplicate statistics under one key variant. Clusters appear
/// in order of their first member.
struct RedundancyReport {
  KeyVariant variant = KeyVariant::SizesDirs;
  std::size_t n_total = 0;
  std::size_t n_unique = 0;
  std::size_t n_same_class_dup = 0;
  std::size_t n_mixed_dup = 0;
  std::vector<DuplicateCluster> clusters;
  /// Per-flow class, parallel to the dataset's flows.
  std::vector<DupClass> membership;
  /// Label histogram over the whole dataset.
  std::map<std::string, std::size_t> label_totals;

  std::size_t n_mixed_clusters() const;
};

/// Groups flows by canonical key. Throws UsageError on an empty dataset.
RedundancyReport cluster_duplicates(const Dataset& ds, KeyVariant variant);

/// n_unique / n_total; 1 - this is the duplicate fraction.
double redundancy_fraction(const RedundancyReport& report);

/// Cumulative distribution of sequence length over one population, sampled
/// at lengths 1..kCaptureCap. `values` is empty when the population is.
struct EcdfCurve {
  std::string population;
  std::size_t count = 0;
  std::vector<double> values;

  bool empty() const { return count == 0; }
};

struct LengthEcdfs {
  EcdfCurve all;
  EcdfCurve same_class;
  EcdfCurve mixed;
};

LengthEcdfs ecdf_by_length(const RedundancyReport& report, const Dataset& ds);

/// Redundancy within the flows of one sequence length.
struct HeatmapRow {
  std::size_t length = 0;
  std::size_t n_flows = 0;
  double sample_fraction = 0;
  double same_class_ratio = 0;
  double mixed_ratio = 0;
};

/// One row per length that has at least one flow, ascending.
std::vector<HeatmapRow> heatmap_by_length(const RedundancyReport& report, const Dataset& ds);

/// Summary counts and fractions (clusters are not expanded).
void to_json(nlohmann::json& j, const RedundancyReport& report);

/// `curve,x,y` rows, one per length per non-empty curve.
std::string ecdf_csv(const LengthEcdfs& ecdfs);
/// `variant,length,n_flows,sample_fraction,same_class_ratio,mixed_ratio`.
std::string heatmap_csv(const std::vector<std::pair<KeyVariant, std::vector<HeatmapRow>>>& tables);

}  // namespace flowgauge
