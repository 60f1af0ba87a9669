#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace flowgauge {

/// Maximum number of packets retained per flow. Keys and features never
/// look past this position.
inline constexpr std::size_t kCaptureCap = 30;

/// One labeled flow: per-packet payload sizes, directions (+1 client to
/// server, -1 server to client) and inter-packet times in milliseconds.
struct FlowRecord {
  std::string id;
  std::string label;
  std::int64_t ts_ms = 0;
  std::string src_key;
  std::string dst_key;
  std::vector<std::int64_t> sizes;
  std::vector<int> dirs;
  std::vector<double> ipts;

  /// Packet count, capped at kCaptureCap.
  std::size_t length() const;

  bool operator==(const FlowRecord&) const = default;
};

/// Returns a description of the first violated invariant, or nullopt when
/// the record is well formed.
std::optional<std::string> find_violation(const FlowRecord& flow);

/// Ordered, immutable collection of flows with unique ids.
class Dataset {
 public:
  Dataset() = default;
  /// Throws UsageError on duplicate ids or invalid records.
  Dataset(std::string name, std::vector<FlowRecord> flows);

  const std::string& name() const { return name_; }
  const std::vector<FlowRecord>& flows() const { return flows_; }
  const std::set<std::string>& label_set() const { return label_set_; }
  std::size_t size() const { return flows_.size(); }
  bool empty() const { return flows_.empty(); }
  const FlowRecord& operator[](std::size_t i) const { return flows_[i]; }

  bool operator==(const Dataset&) const = default;

 private:
  std::string name_;
  std::vector<FlowRecord> flows_;
  std::set<std::string> label_set_;
};

enum class KeyVariant { SizesDirs, SizesDirsIpts };

std::string_view to_string(KeyVariant variant);
KeyVariant key_variant_from_string(std::string_view text);

/// Exact packet-sequence identity of a flow under a key variant. IPTs
/// compare at their stored value with no rounding.
struct CanonicalKey {
  KeyVariant variant = KeyVariant::SizesDirs;
  std::vector<std::int64_t> sizes;
  std::vector<int> dirs;
  std::vector<double> ipts;  // empty for SizesDirs

  std::size_t length() const { return sizes.size(); }

  bool operator==(const CanonicalKey&) const = default;
};

CanonicalKey canonical_key(const FlowRecord& flow, KeyVariant variant);

struct CanonicalKeyHash {
  std::size_t operator()(const CanonicalKey& key) const noexcept;
};

}  // namespace flowgauge
