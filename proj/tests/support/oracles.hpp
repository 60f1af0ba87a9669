#pragma once

// Brute-force reference computations. None of these call into the code
// paths they are used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowgauge/flow.hpp"
#include "flowgauge/neighbor_index.hpp"

namespace flowgauge::testing {

inline double oracle_l1(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

struct OracleHit {
  std::string label;
  double distance;
  std::size_t row;
  std::size_t voters;
};

/// Exhaustive scan; ties go to the lowest row.
inline OracleHit linear_scan_top1(const FeatureMatrix& train, const std::vector<std::string>& labels,
                                  std::span<const double> q) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < train.rows(); ++r) {
    const double d = oracle_l1(train.row(r), q);
    if (d < best_d) {
      best_d = d;
      best = r;
    }
  }
  return {labels[best], best_d, best, 1};
}

/// Radius vote by exhaustive scan: most frequent label among rows within t;
/// ties by nearest voter then lowest row; empty radius falls back to top-1.
inline OracleHit linear_scan_vote(const FeatureMatrix& train, const std::vector<std::string>& labels,
                                  std::span<const double> q, double t) {
  const auto top = linear_scan_top1(train, labels, q);
  struct Tally {
    std::size_t count = 0;
    double nearest = std::numeric_limits<double>::infinity();
    std::size_t nearest_row = std::numeric_limits<std::size_t>::max();
  };
  std::map<std::string, Tally> tallies;
  std::size_t voters = 0;
  for (std::size_t r = 0; r < train.rows(); ++r) {
    const double d = oracle_l1(train.row(r), q);
    if (d > t) continue;
    ++voters;
    auto& tl = tallies[labels[r]];
    ++tl.count;
    if (d < tl.nearest || (d == tl.nearest && r < tl.nearest_row)) {
      tl.nearest = d;
      tl.nearest_row = r;
    }
  }
  if (voters == 0) return top;
  const std::pair<const std::string, Tally>* win = nullptr;
  for (const auto& entry : tallies) {
    if (!win) {
      win = &entry;
      continue;
    }
    const auto& a = entry.second;
    const auto& b = win->second;
    if (a.count > b.count ||
        (a.count == b.count && (a.nearest < b.nearest || (a.nearest == b.nearest && a.nearest_row < b.nearest_row)))) {
      win = &entry;
    }
  }
  return {win->first, top.distance, top.row, voters};
}

/// Plain k-NN majority over the k nearest rows (lowest row on distance
/// ties, smallest label on vote ties). Reference only; not a product mode.
inline std::string knn_majority(const FeatureMatrix& train, const std::vector<std::string>& labels,
                                std::span<const double> q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t r = 0; r < train.rows(); ++r) all.emplace_back(oracle_l1(train.row(r), q), r);
  std::sort(all.begin(), all.end());
  std::map<std::string, std::size_t> votes;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) ++votes[labels[all[i].second]];
  return std::max_element(votes.begin(), votes.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

/// Element-wise sequence identity on the first kCaptureCap packets.
inline bool same_sequences(const FlowRecord& a, const FlowRecord& b, bool with_ipts) {
  const auto la = std::min(a.sizes.size(), kCaptureCap);
  const auto lb = std::min(b.sizes.size(), kCaptureCap);
  if (la != lb) return false;
  for (std::size_t i = 0; i < la; ++i) {
    if (a.sizes[i] != b.sizes[i] || a.dirs[i] != b.dirs[i]) return false;
    if (with_ipts && a.ipts[i] != b.ipts[i]) return false;
  }
  return true;
}

struct OracleClusters {
  std::vector<std::vector<std::size_t>> groups;  // all groups incl. singletons
  std::size_t n_unique = 0;
  std::size_t n_same = 0;
  std::size_t n_mixed = 0;
  std::vector<int> status;  // 0 unique, 1 same, 2 mixed
};

/// Quadratic all-pairs grouping.
inline OracleClusters all_pairs_clusters(const Dataset& ds, bool with_ipts) {
  OracleClusters out;
  const std::size_t n = ds.size();
  std::vector<int> group_of(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (group_of[i] >= 0) continue;
    group_of[i] = static_cast<int>(out.groups.size());
    out.groups.push_back({i});
    for (std::size_t j = i + 1; j < n; ++j) {
      if (group_of[j] < 0 && same_sequences(ds[i], ds[j], with_ipts)) {
        group_of[j] = group_of[i];
        out.groups.back().push_back(j);
      }
    }
  }
  out.status.assign(n, 0);
  for (const auto& g : out.groups) {
    if (g.size() == 1) {
      ++out.n_unique;
      continue;
    }
    std::set<std::string> labels;
    for (auto i : g) labels.insert(ds[i].label);
    const int st = labels.size() > 1 ? 2 : 1;
    (st == 2 ? out.n_mixed : out.n_same) += g.size();
    for (auto i : g) out.status[i] = st;
  }
  return out;
}

/// Best accuracy of any classifier that maps each key group to one label,
/// found by trying every assignment of dataset labels to groups.
inline double enumerate_best_accuracy(const Dataset& ds, bool with_ipts) {
  const auto clusters = all_pairs_clusters(ds, with_ipts);
  const std::vector<std::string> labels(ds.label_set().begin(), ds.label_set().end());
  const std::size_t g = clusters.groups.size();
  std::vector<std::size_t> choice(g, 0);
  std::size_t best = 0;
  for (;;) {
    std::size_t correct = 0;
    for (std::size_t k = 0; k < g; ++k) {
      for (auto i : clusters.groups[k]) correct += ds[i].label == labels[choice[k]];
    }
    best = std::max(best, correct);
    std::size_t k = 0;
    while (k < g && ++choice[k] == labels.size()) choice[k++] = 0;
    if (k == g) break;
  }
  return static_cast<double>(best) / static_cast<double>(ds.size());
}

/// Benign members of groups that contain any malicious member, over all
/// benign samples.
inline double fpr_scan(const Dataset& ds, const std::set<std::string>& benign, bool with_ipts) {
  const auto clusters = all_pairs_clusters(ds, with_ipts);
  std::size_t benign_total = 0, fp = 0;
  for (const auto& f : ds.flows()) benign_total += benign.count(f.label);
  for (const auto& grp : clusters.groups) {
    bool malicious = false;
    std::size_t b = 0;
    for (auto i : grp) {
      if (benign.count(ds[i].label)) {
        ++b;
      } else {
        malicious = true;
      }
    }
    if (malicious) fp += b;
  }
  return static_cast<double>(fp) / static_cast<double>(benign_total);
}

struct ConfusionScores {
  double accuracy = 0;
  double weighted_f1 = 0;
  std::map<std::string, double> f1;
};

/// Scores from an explicit confusion matrix.
inline ConfusionScores confusion_scores(const std::vector<std::string>& preds,
                                        const std::vector<std::string>& truth) {
  std::set<std::string> classes(truth.begin(), truth.end());
  classes.insert(preds.begin(), preds.end());
  const std::vector<std::string> cls(classes.begin(), classes.end());
  const std::size_t k = cls.size();
  std::vector<std::vector<std::size_t>> cm(k, std::vector<std::size_t>(k, 0));
  auto idx = [&](const std::string& s) {
    return static_cast<std::size_t>(std::lower_bound(cls.begin(), cls.end(), s) - cls.begin());
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm[idx(truth[i])][idx(preds[i])];
  ConfusionScores out;
  std::size_t diag = 0;
  for (std::size_t c = 0; c < k; ++c) diag += cm[c][c];
  out.accuracy = static_cast<double>(diag) / static_cast<double>(truth.size());
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += cm[c][j];
      col += cm[j][c];
    }
    const double p = col ? static_cast<double>(cm[c][c]) / static_cast<double>(col) : 0.0;
    const double r = row ? static_cast<double>(cm[c][c]) / static_cast<double>(row) : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    out.f1[cls[c]] = f;
    out.weighted_f1 += f * static_cast<double>(row) / static_cast<double>(truth.size());
  }
  return out;
}

/// Spearman rho by counting ranks directly and applying Pearson to them.
inline double spearman_by_hand(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::size_t less = 0, equal = 0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace flowgauge::testing
