#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgauge/flow.hpp"

namespace flowgauge {

/// Parameters of the input-space baseline. Sizes are used unscaled; IPTs are
/// clipped to ipt_maxclip and then multiplied by ipt_scale; directions are
/// multiplied by dir_scale.
struct ScalingConfig {
  int n_packets = 10;
  double dir_scale = 1.0;
  double ipt_scale = 0.1;
  double ipt_maxclip = 1000.0;
  bool use_ipt = true;

  std::size_t width() const {
    return static_cast<std::size_t>(n_packets) * (use_ipt ? 3 : 2);
  }

  /// Throws UsageError when a field is out of range.
  void validate() const;

  bool operator==(const ScalingConfig&) const = default;
};

/// N=10, DIR_scale=1, IPT_scale=0.1, IPT_maxclip=1000 ms, IPTs enabled.
ScalingConfig default_config();

void to_json(nlohmann::json& j, const ScalingConfig& cfg);
/// Accepts the flat five-field object; ipt fields may be omitted or null
/// when use_ipt is false. Validates the result.
void from_json(const nlohmann::json& j, ScalingConfig& cfg);

/// Fixed-width vector laid out as [sizes | ipts | dirs], each block
/// n_packets wide; the ipt block is absent when use_ipt is false. Packets
/// past the flow's end are zero in every block.
struct FeatureVector {
  std::vector<double> values;

  std::size_t width() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

FeatureVector featurize(const FlowRecord& flow, const ScalingConfig& cfg);

/// Writes the features of `flow` into out (out.size() == cfg.width()).
void featurize_into(const FlowRecord& flow, const ScalingConfig& cfg, std::span<double> out);

/// Sum of |a_i - b_i| accumulated in index order. Throws UsageError on a
/// width mismatch.
double l1_distance(std::span<const double> a, std::span<const double> b);
double l1_distance(const FeatureVector& a, const FeatureVector& b);

}  // namespace flowgauge
