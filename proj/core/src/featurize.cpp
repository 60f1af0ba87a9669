#include "flowgauge/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowgauge/error.hpp"

namespace flowgauge {

void ScalingConfig::validate() const {
  if (n_packets < 1 || n_packets > static_cast<int>(kCaptureCap)) {
    throw UsageError("n_packets must be in [1, 30], got " + std::to_string(n_packets));
  }
  if (!std::isfinite(dir_scale) || dir_scale < 0) throw UsageError("dir_scale must be finite and >= 0");
  if (use_ipt) {
    if (!std::isfinite(ipt_scale) || ipt_scale < 0) {
      throw UsageError("ipt_scale must be finite and >= 0");
    }
    if (!std::isfinite(ipt_maxclip) || ipt_maxclip <= 0) {
      throw UsageError("ipt_maxclip must be finite and > 0");
    }
  }
}

ScalingConfig default_config() { return ScalingConfig{10, 1.0, 0.1, 1000.0, true}; }

void to_json(nlohmann::json& j, const ScalingConfig& cfg) {
  j = nlohmann::json{{"n_packets", cfg.n_packets},
                     {"dir_scale", cfg.dir_scale},
                     {"ipt_scale", cfg.ipt_scale},
                     {"ipt_maxclip", cfg.ipt_maxclip},
                     {"use_ipt", cfg.use_ipt}};
}

void from_json(const nlohmann::json& j, ScalingConfig& cfg) {
  try {
    ScalingConfig out;
    j.at("n_packets").get_to(out.n_packets);
    j.at("dir_scale").get_to(out.dir_scale);
    out.use_ipt = j.value("use_ipt", true);
    auto optional_real = [&](const char* name, double& field) {
      auto it = j.find(name);
      if (it != j.end() && !it->is_null()) {
        it->get_to(field);
      } else if (out.use_ipt) {
        throw UsageError(std::string("scaling config is missing ") + name);
      }
    };
    optional_real("ipt_scale", out.ipt_scale);
    optional_real("ipt_maxclip", out.ipt_maxclip);
    out.validate();
    cfg = out;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad scaling config: ") + e.what());
  }
}

void featurize_into(const FlowRecord& flow, const ScalingConfig& cfg, std::span<double> out) {
  const auto n = static_cast<std::size_t>(cfg.n_packets);
  if (out.size() != cfg.width()) throw UsageError("feature buffer width mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t len = std::min(flow.length(), n);
  auto sizes = out.subspan(0, n);
  auto dirs = out.subspan(cfg.use_ipt ? 2 * n : n, n);
  for (std::size_t i = 0; i < len; ++i) {
    sizes[i] = static_cast<double>(flow.sizes[i]);
    dirs[i] = static_cast<double>(flow.dirs[i]) * cfg.dir_scale;
  }
  if (cfg.use_ipt) {
    auto ipts = out.subspan(n, n);
    for (std::size_t i = 0; i < len; ++i) {
      ipts[i] = std::min(flow.ipts[i], cfg.ipt_maxclip) * cfg.ipt_scale;
    }
  }
}

FeatureVector featurize(const FlowRecord& flow, const ScalingConfig& cfg) {
  FeatureVector fv;
  fv.values.resize(cfg.width());
  featurize_into(flow, cfg, fv.values);
  return fv;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw UsageError("l1_distance width mismatch: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i] - b[i]);
  return sum;
}

double l1_distance(const FeatureVector& a, const FeatureVector& b) {
  return l1_distance(std::span<const double>(a.values), std::span<const double>(b.values));
}

}  // namespace flowgauge
