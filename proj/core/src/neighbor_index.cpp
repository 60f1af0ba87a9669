#include "flowgauge/neighbor_index.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "flowgauge/error.hpp"
#include "flowgauge/ingest.hpp"
#include "flowgauge/parallel.hpp"

namespace flowgauge {

namespace {

constexpr std::size_t kLanes = 8;
// Coordinates accumulated between early-exit checks.
constexpr std::size_t kChunk = 8;
constexpr std::string_view kMagic = "FGIX1";
constexpr double kInf = std::numeric_limits<double>::infinity();

double sequential_sum(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double abs_sum(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += std::fabs(v);
  return s;
}

class ByteWriter {
 public:
  void bytes(std::string_view b) { out_.append(b); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  std::string take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}
  std::string_view bytes(std::size_t n) {
    need(n);
    auto out = in_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DataError("index artifact is truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::span<double> FeatureMatrix::append_row() {
  data_.resize(data_.size() + width_, 0.0);
  return {data_.data() + data_.size() - width_, width_};
}

void FeatureMatrix::push_back(std::span<const double> row) {
  if (row.size() != width_) throw UsageError("feature row width mismatch");
  data_.insert(data_.end(), row.begin(), row.end());
}

FeatureMatrix featurize_all(std::span<const FlowRecord> flows, const ScalingConfig& cfg) {
  cfg.validate();
  FeatureMatrix m(cfg.width());
  m.reserve(flows.size());
  for (const auto& f : flows) featurize_into(f, cfg, m.append_row());
  return m;
}

PredictMode PredictMode::parse(std::string_view text) {
  if (text == "top1") return top1();
  constexpr std::string_view prefix = "vote:";
  if (text.substr(0, prefix.size()) == prefix) {
    auto arg = text.substr(prefix.size());
    double t = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), t);
    if (ec == std::errc{} && ptr == arg.data() + arg.size() && t >= 0) return vote(t);
  }
  throw UsageError("mode must be 'top1' or 'vote:<t>' with t >= 0, got '" + std::string(text) + "'");
}

std::string PredictMode::to_string() const {
  return kind == Kind::Top1 ? "top1" : "vote:" + format_real(t_maj);
}

NeighborIndex NeighborIndex::build(const FeatureMatrix& train, std::span<const std::string> labels,
                                   std::optional<ScalingConfig> cfg) {
  const std::size_t n = train.rows();
  if (n == 0) throw UsageError("cannot build a neighbor index from an empty training set");
  if (labels.size() != n) throw UsageError("training labels and rows differ in count");
  if (n >= std::numeric_limits<std::uint32_t>::max()) throw UsageError("training set too large");
  if (cfg && cfg->width() != train.width()) throw UsageError("scaling config width mismatch");

  NeighborIndex idx;
  idx.width_ = train.width();
  idx.n_rows_ = n;
  idx.n_groups_ = (n + kLanes - 1) / kLanes;
  idx.cfg_ = cfg;

  std::unordered_map<std::string_view, std::uint32_t> label_ids;
  idx.row_label_.reserve(n);
  for (const auto& label : labels) {
    auto [it, inserted] = label_ids.try_emplace(label, static_cast<std::uint32_t>(idx.labels_.size()));
    if (inserted) idx.labels_.push_back(label);
    idx.row_label_.push_back(it->second);
  }

  std::vector<double> sums(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = train.row(i);
    for (double v : row) {
      if (!std::isfinite(v)) throw UsageError("training vectors must be finite");
    }
    sums[i] = sequential_sum(row);
    idx.max_abs_sum_ = std::max(idx.max_abs_sum_, abs_sum(row));
  }

  idx.ordinal_of_.resize(n);
  std::iota(idx.ordinal_of_.begin(), idx.ordinal_of_.end(), 0u);
  std::sort(idx.ordinal_of_.begin(), idx.ordinal_of_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return sums[a] < sums[b] || (sums[a] == sums[b] && a < b);
  });

  const std::size_t w = idx.width_;
  idx.sums_.resize(n);
  idx.groups_.assign(idx.n_groups_ * w * kLanes, kInf);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto ordinal = idx.ordinal_of_[pos];
    idx.sums_[pos] = sums[ordinal];
    auto row = train.row(ordinal);
    double* group = idx.groups_.data() + (pos / kLanes) * w * kLanes;
    const std::size_t lane = pos % kLanes;
    for (std::size_t d = 0; d < w; ++d) group[d * kLanes + lane] = row[d];
  }
  return idx;
}

NeighborIndex NeighborIndex::build(std::span<const LabeledVector> train,
                                   std::optional<ScalingConfig> cfg) {
  if (train.empty()) throw UsageError("cannot build a neighbor index from an empty training set");
  FeatureMatrix m(train.front().features.width());
  m.reserve(train.size());
  std::vector<std::string> labels;
  labels.reserve(train.size());
  for (const auto& sample : train) {
    m.push_back(sample.features.values);
    labels.push_back(sample.label);
  }
  return build(m, labels, cfg);
}

std::vector<double> NeighborIndex::row(std::size_t ordinal) const {
  if (ordinal >= n_rows_) throw UsageError("row ordinal out of range");
  const auto pos = static_cast<std::size_t>(
      std::find(ordinal_of_.begin(), ordinal_of_.end(), static_cast<std::uint32_t>(ordinal)) -
      ordinal_of_.begin());
  const double* group = groups_.data() + (pos / kLanes) * width_ * kLanes;
  std::vector<double> out(width_);
  for (std::size_t d = 0; d < width_; ++d) out[d] = group[d * kLanes + pos % kLanes];
  return out;
}

void NeighborIndex::check_query(std::span<const double> query) const {
  if (query.size() != width_) {
    throw UsageError("query width " + std::to_string(query.size()) + " does not match index width " +
                     std::to_string(width_));
  }
}

template <typename Visitor>
void NeighborIndex::scan(std::span<const double> query, Visitor& visitor) const {
  const double* q = query.data();
  const std::size_t w = width_;
  const double q_sum = sequential_sum(query);

  // Rounding slack for the sum bound: both sums and the accumulated
  // distance carry at most ~w ulps of relative error.
  const double eps = 4.0 * static_cast<double>(w + 2) * DBL_EPSILON;
  const double slack = eps * (max_abs_sum_ + abs_sum(query));
  auto excluded = [&](double gap) { return gap * (1.0 - eps) - slack > visitor.bound(); };

  auto gap_of = [&](std::size_t g) {
    const std::size_t first = g * kLanes;
    const std::size_t last = std::min(n_rows_, first + kLanes) - 1;
    if (sums_[last] < q_sum) return q_sum - sums_[last];
    if (sums_[first] > q_sum) return sums_[first] - q_sum;
    return 0.0;
  };

  auto visit_group = [&](std::size_t g) {
    const double* group = groups_.data() + g * w * kLanes;
    const double bound = visitor.bound();
    double acc[kLanes] = {};
    std::size_t d = 0;
    while (d < w) {
      const std::size_t end = std::min(w, d + kChunk);
      for (; d < end; ++d) {
        const double qd = q[d];
        const double* col = group + d * kLanes;
        for (std::size_t l = 0; l < kLanes; ++l) acc[l] += std::fabs(qd - col[l]);
      }
      if (d < w) {
        double lowest = acc[0];
        for (std::size_t l = 1; l < kLanes; ++l) lowest = std::min(lowest, acc[l]);
        if (lowest > bound) return;
      }
    }
    const std::size_t first = g * kLanes;
    const std::size_t lanes = std::min(kLanes, n_rows_ - first);
    for (std::size_t l = 0; l < lanes; ++l) visitor.offer(acc[l], ordinal_of_[first + l]);
  };

  const auto start = static_cast<std::size_t>(
      std::lower_bound(sums_.begin(), sums_.end(), q_sum) - sums_.begin());
  std::ptrdiff_t up = static_cast<std::ptrdiff_t>(std::min(start / kLanes, n_groups_));
  std::ptrdiff_t down = up - 1;
  const auto n_groups = static_cast<std::ptrdiff_t>(n_groups_);
  while (up < n_groups || down >= 0) {
    const double up_gap = up < n_groups ? gap_of(static_cast<std::size_t>(up)) : kInf;
    const double down_gap = down >= 0 ? gap_of(static_cast<std::size_t>(down)) : kInf;
    const bool take_up = up_gap <= down_gap;
    // Gaps grow outward on both sides, so once the nearer side is out of
    // reach, everything is.
    if (excluded(take_up ? up_gap : down_gap)) break;
    visit_group(static_cast<std::size_t>(take_up ? up++ : down--));
  }
}

Prediction NeighborIndex::make_prediction(const Best& best, std::uint32_t label,
                                          std::size_t voters) const {
  return Prediction{labels_[label], best.distance, voters, best.ordinal};
}

namespace {

struct Top1Visitor {
  double best_distance = kInf;
  std::uint32_t best_ordinal = std::numeric_limits<std::uint32_t>::max();

  double bound() const { return best_distance; }
  void offer(double distance, std::uint32_t ordinal) {
    if (distance < best_distance || (distance == best_distance && ordinal < best_ordinal)) {
      best_distance = distance;
      best_ordinal = ordinal;
    }
  }
};

struct VoteVisitor : Top1Visitor {
  double t_maj = 0;
  std::vector<std::pair<double, std::uint32_t>> voters;

  double bound() const { return std::max(best_distance, t_maj); }
  void offer(double distance, std::uint32_t ordinal) {
    Top1Visitor::offer(distance, ordinal);
    if (distance <= t_maj) voters.emplace_back(distance, ordinal);
  }
};

}  // namespace

Prediction NeighborIndex::predict_top1(std::span<const double> query) const {
  check_query(query);
  Top1Visitor visitor;
  scan(query, visitor);
  const Best best{visitor.best_distance, visitor.best_ordinal};
  return make_prediction(best, row_label_[best.ordinal], 1);
}

Prediction NeighborIndex::predict_vote(std::span<const double> query, VotingConfig voting) const {
  check_query(query);
  if (!(voting.t_maj >= 0)) throw UsageError("t_maj must be >= 0");
  VoteVisitor visitor;
  visitor.t_maj = voting.t_maj;
  scan(query, visitor);
  const Best best{visitor.best_distance, visitor.best_ordinal};
  if (visitor.voters.empty()) return make_prediction(best, row_label_[best.ordinal], 1);

  struct Tally {
    std::size_t count = 0;
    double nearest = kInf;
    std::uint32_t nearest_ordinal = std::numeric_limits<std::uint32_t>::max();
  };
  std::vector<Tally> tallies(labels_.size());
  for (const auto& [distance, ordinal] : visitor.voters) {
    auto& t = tallies[row_label_[ordinal]];
    ++t.count;
    if (distance < t.nearest || (distance == t.nearest && ordinal < t.nearest_ordinal)) {
      t.nearest = distance;
      t.nearest_ordinal = ordinal;
    }
  }
  std::uint32_t winner = 0;
  for (std::uint32_t label = 1; label < tallies.size(); ++label) {
    const auto& a = tallies[label];
    const auto& b = tallies[winner];
    if (a.count > b.count ||
        (a.count == b.count && a.count > 0 &&
         (a.nearest < b.nearest || (a.nearest == b.nearest && a.nearest_ordinal < b.nearest_ordinal)))) {
      winner = label;
    }
  }
  return make_prediction(best, winner, visitor.voters.size());
}

Prediction NeighborIndex::predict(std::span<const double> query, PredictMode mode) const {
  return mode.kind == PredictMode::Kind::Top1 ? predict_top1(query)
                                              : predict_vote(query, VotingConfig{mode.t_maj});
}

std::vector<Prediction> NeighborIndex::predict_batch(const FeatureMatrix& queries, PredictMode mode,
                                                     std::size_t workers) const {
  if (queries.rows() > 0 && queries.width() != width_) {
    throw UsageError("query matrix width does not match index width");
  }
  std::vector<Prediction> out(queries.rows());
  parallel_for(
      queries.rows(), [&](std::size_t i) { out[i] = predict(queries.row(i), mode); }, workers, 16);
  return out;
}

std::string NeighborIndex::serialize() const {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(static_cast<std::uint32_t>(width_));
  w.u64(n_rows_);
  w.u32(static_cast<std::uint32_t>(labels_.size()));
  for (const auto& label : labels_) {
    w.u32(static_cast<std::uint32_t>(label.size()));
    w.bytes(label);
  }
  for (auto id : row_label_) w.u32(id);
  std::vector<std::size_t> position(n_rows_);
  for (std::size_t pos = 0; pos < n_rows_; ++pos) position[ordinal_of_[pos]] = pos;
  for (std::size_t ordinal = 0; ordinal < n_rows_; ++ordinal) {
    const std::size_t pos = position[ordinal];
    const double* group = groups_.data() + (pos / kLanes) * width_ * kLanes;
    for (std::size_t d = 0; d < width_; ++d) w.f64(group[d * kLanes + pos % kLanes]);
  }
  return w.take();
}

NeighborIndex NeighborIndex::deserialize(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.bytes(kMagic.size()) != kMagic) throw DataError("not a neighbor index artifact (bad magic)");
  const std::size_t width = r.u32();
  const std::uint64_t rows = r.u64();
  const std::uint32_t n_labels = r.u32();
  if (width == 0 || rows == 0) throw DataError("index artifact is empty");
  if (rows > (bytes.size() / 8) / width) throw DataError("index artifact is truncated");
  std::vector<std::string> labels;
  labels.reserve(std::min<std::size_t>(n_labels, rows));
  for (std::uint32_t i = 0; i < n_labels; ++i) labels.emplace_back(r.bytes(r.u32()));
  std::vector<std::string> row_labels;
  row_labels.reserve(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    const auto id = r.u32();
    if (id >= n_labels) throw DataError("index artifact has a bad label id");
    row_labels.push_back(labels[id]);
  }
  FeatureMatrix m(width);
  m.reserve(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    auto row = m.append_row();
    for (auto& v : row) v = r.f64();
  }
  if (!r.done()) throw DataError("index artifact has trailing bytes");
  return build(m, row_labels);
}

void NeighborIndex::save(const std::filesystem::path& path) const { write_text_file(path, serialize()); }

NeighborIndex NeighborIndex::load(const std::filesystem::path& path) {
  return deserialize(read_text_file(path));
}

Evaluation evaluate(const NeighborIndex& index, const FeatureMatrix& test,
                    std::span<const std::string> truth, PredictMode mode, std::size_t workers) {
  if (test.rows() != truth.size()) throw UsageError("test rows and labels differ in count");
  Evaluation eval;
  eval.predictions = index.predict_batch(test, mode, workers);
  std::vector<std::string> preds;
  preds.reserve(eval.predictions.size());
  for (const auto& p : eval.predictions) preds.push_back(p.label);
  eval.metrics = weighted_f1(preds, truth);
  return eval;
}

Evaluation evaluate(const NeighborIndex& index, std::span<const LabeledVector> test, PredictMode mode,
                    std::size_t workers) {
  FeatureMatrix m(index.width());
  std::vector<std::string> truth;
  for (const auto& sample : test) {
    m.push_back(sample.features.values);
    truth.push_back(sample.label);
  }
  return evaluate(index, m, truth, mode, workers);
}

}  // namespace flowgauge
