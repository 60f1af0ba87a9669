#include "flowgauge/flow.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

#include "flowgauge/error.hpp"

namespace flowgauge {

std::size_t FlowRecord::length() const { return std::min(sizes.size(), kCaptureCap); }

std::optional<std::string> find_violation(const FlowRecord& flow) {
  if (flow.sizes.size() != flow.dirs.size() || flow.sizes.size() != flow.ipts.size()) {
    return "ragged";
  }
  if (flow.sizes.empty()) return "empty";
  if (flow.ts_ms < 0) return "bad_ts";
  for (auto s : flow.sizes) {
    if (s < 0) return "bad_size";
  }
  for (int d : flow.dirs) {
    if (d != 1 && d != -1) return "bad_dir";
  }
  for (double t : flow.ipts) {
    if (!(t >= 0.0) || t == std::numeric_limits<double>::infinity()) return "bad_ipt";
  }
  if (flow.ipts.front() != 0.0) return "ipt0_nonzero";
  return std::nullopt;
}

Dataset::Dataset(std::string name, std::vector<FlowRecord> flows)
    : name_(std::move(name)), flows_(std::move(flows)) {
  std::unordered_set<std::string_view> ids;
  ids.reserve(flows_.size());
  for (const auto& f : flows_) {
    if (!ids.insert(f.id).second) throw UsageError("duplicate flow id: " + f.id);
    if (auto v = find_violation(f)) throw UsageError("flow " + f.id + " invalid: " + *v);
    label_set_.insert(f.label);
  }
}

std::string_view to_string(KeyVariant variant) {
  switch (variant) {
    case KeyVariant::SizesDirs:
      return "sizes_dirs";
    case KeyVariant::SizesDirsIpts:
      return "sizes_dirs_ipts";
  }
  return "unknown";
}

KeyVariant key_variant_from_string(std::string_view text) {
  if (text == "sizes_dirs") return KeyVariant::SizesDirs;
  if (text == "sizes_dirs_ipts") return KeyVariant::SizesDirsIpts;
  throw UsageError("unknown key variant: " + std::string(text));
}

CanonicalKey canonical_key(const FlowRecord& flow, KeyVariant variant) {
  const std::size_t n = flow.length();
  CanonicalKey key;
  key.variant = variant;
  key.sizes.assign(flow.sizes.begin(), flow.sizes.begin() + static_cast<std::ptrdiff_t>(n));
  key.dirs.assign(flow.dirs.begin(), flow.dirs.begin() + static_cast<std::ptrdiff_t>(n));
  if (variant == KeyVariant::SizesDirsIpts) {
    key.ipts.reserve(n);
    // +0.0 folds a stored -0.0 onto 0.0 so hash and equality agree.
    for (std::size_t i = 0; i < n; ++i) key.ipts.push_back(flow.ipts[i] + 0.0);
  }
  return key;
}

namespace {

inline void mix(std::size_t& seed, std::size_t value) {
  seed ^= value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

}  // namespace

std::size_t CanonicalKeyHash::operator()(const CanonicalKey& key) const noexcept {
  std::size_t h = static_cast<std::size_t>(key.variant);
  mix(h, key.sizes.size());
  for (auto s : key.sizes) mix(h, std::hash<std::int64_t>{}(s));
  for (int d : key.dirs) mix(h, static_cast<std::size_t>(d + 1));
  for (double t : key.ipts) mix(h, std::hash<double>{}(t));
  return h;
}

}  // namespace flowgauge
