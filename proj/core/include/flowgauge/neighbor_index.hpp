#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowgauge/featurize.hpp"
#include "flowgauge/metrics.hpp"

namespace flowgauge {

/// Dense row-major matrix of feature rows.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(std::size_t width = 0) : width_(width) {}

  std::size_t width() const { return width_; }
  std::size_t rows() const { return width_ ? data_.size() / width_ : 0; }
  void reserve(std::size_t rows) { data_.reserve(rows * width_); }

  /// Appends a zeroed row and returns it for filling.
  std::span<double> append_row();
  void push_back(std::span<const double> row);

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * width_, width_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * width_, width_}; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t width_;
  std::vector<double> data_;
};

/// Features of every flow in `flows` under cfg, one row each.
FeatureMatrix featurize_all(std::span<const FlowRecord> flows, const ScalingConfig& cfg);

struct LabeledVector {
  FeatureVector features;
  std::string label;
};

struct VotingConfig {
  double t_maj = 0.0;
};

struct Prediction {
  std::string label;
  double nn_distance = 0.0;
  std::size_t n_voters = 1;
  std::size_t nn_row = 0;  // training ordinal of the nearest neighbor

  bool operator==(const Prediction&) const = default;
};

/// Query mode: nearest neighbor, or radius vote with threshold t_maj.
struct PredictMode {
  enum class Kind { Top1, Vote } kind = Kind::Top1;
  double t_maj = 0.0;

  static PredictMode top1() { return {}; }
  static PredictMode vote(double t) { return {Kind::Vote, t}; }
  /// Parses "top1" or "vote:<t>".
  static PredictMode parse(std::string_view text);
  std::string to_string() const;
};

/// Exact L1 nearest-neighbor index.
///
/// Distances are accumulated coordinate by coordinate in index order, so
/// every reported distance equals l1_distance() bit for bit. Rows are kept
/// sorted by coordinate sum: |sum(q) - sum(x)| bounds L1(q, x) from below
/// and lets a query skip whole runs of rows. Within a run, rows are stored
/// in interleaved groups of eight so one coordinate updates eight partial
/// sums at a time, and a group is abandoned as soon as all eight partial
/// sums exceed the current bound. Neither shortcut changes results.
///
/// Ties on distance resolve to the lowest training ordinal. Immutable after
/// build; concurrent queries are safe.
class NeighborIndex {
 public:
  /// Throws UsageError on an empty training set or label count mismatch.
  static NeighborIndex build(const FeatureMatrix& train, std::span<const std::string> labels,
                             std::optional<ScalingConfig> cfg = std::nullopt);
  static NeighborIndex build(std::span<const LabeledVector> train,
                             std::optional<ScalingConfig> cfg = std::nullopt);

  std::size_t size() const { return n_rows_; }
  std::size_t width() const { return width_; }
  const std::optional<ScalingConfig>& config() const { return cfg_; }
  const std::vector<std::string>& label_table() const { return labels_; }
  const std::string& label_of(std::size_t ordinal) const { return labels_[row_label_[ordinal]]; }
  /// Training row by original ordinal.
  std::vector<double> row(std::size_t ordinal) const;

  /// Label of a training row at minimal L1 distance (lowest ordinal on
  /// ties). Throws UsageError on a width mismatch.
  Prediction predict_top1(std::span<const double> query) const;

  /// Majority label among training rows within distance t_maj. Falls back
  /// to predict_top1 when no row is that close. Label-count ties go to the
  /// label with the nearest voter, then the lowest ordinal.
  Prediction predict_vote(std::span<const double> query, VotingConfig voting) const;

  Prediction predict(std::span<const double> query, PredictMode mode) const;

  /// Predictions for every query row, in order; parallel over queries.
  std::vector<Prediction> predict_batch(const FeatureMatrix& queries, PredictMode mode,
                                        std::size_t workers = 0) const;

  /// Binary artifact: "FGIX1", u32 width, u64 rows, u32 label count, labels
  /// as (u32 length, bytes), u32 label id per row, then the f64 matrix in
  /// row-major training order. Little-endian throughout.
  std::string serialize() const;
  static NeighborIndex deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static NeighborIndex load(const std::filesystem::path& path);

 private:
  struct Best {
    double distance;
    std::uint32_t ordinal;
  };
  struct Voter {
    double distance;
    std::uint32_t ordinal;
  };

  template <typename Visitor>
  void scan(std::span<const double> query, Visitor& visitor) const;
  void check_query(std::span<const double> query) const;
  Prediction make_prediction(const Best& best, std::uint32_t label, std::size_t voters) const;

  std::size_t width_ = 0;
  std::size_t n_rows_ = 0;
  std::size_t n_groups_ = 0;
  std::optional<ScalingConfig> cfg_;
  std::vector<std::string> labels_;
  std::vector<std::uint32_t> row_label_;   // by ordinal
  std::vector<std::uint32_t> ordinal_of_;  // by sorted position
  std::vector<double> sums_;               // by sorted position, ascending
  std::vector<double> groups_;             // n_groups_ x width_ x kLanes
  double max_abs_sum_ = 0.0;
};

struct Evaluation {
  std::vector<Prediction> predictions;
  EvalResult metrics;
};

/// Predicts every test row and scores the predictions against `truth`.
Evaluation evaluate(const NeighborIndex& index, const FeatureMatrix& test,
                    std::span<const std::string> truth, PredictMode mode, std::size_t workers = 0);
Evaluation evaluate(const NeighborIndex& index, std::span<const LabeledVector> test,
                    PredictMode mode, std::size_t workers = 0);

}  // namespace flowgauge
