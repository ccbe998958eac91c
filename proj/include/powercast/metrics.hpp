// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "powercast/error.hpp"

namespace powercast {

struct RocPoint {
  double fpr = 0;
  double tpr = 0;
  double threshold = 0;
};

namespace detail {

inline void check_scored_labels(const std::vector<double>& scores,
                                const std::vector<uint8_t>& labels) {
  require(!scores.empty(), "need at least one scored sample");
  require(scores.size() == labels.size(), "scores and labels must align");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    require(std::isfinite(scores[i]), "scores must be finite");
    require(labels[i] == 0 || labels[i] == 1, "labels must be 0 or 1");
    pos += labels[i];
  }
  if (pos == 0 || pos == labels.size())
    throw DegenerateLabelsError("labels contain only one class");
}

}  // namespace detail

// One vertex per distinct score, thresholds descending, anchored at
// (0, 0, +inf). Tied scores collapse into a single vertex, which is what
// makes the trapezoid area equal the tie-aware rank statistic.
inline std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                       const std::vector<uint8_t>& labels) {
  detail::check_scored_labels(scores, labels);
  const std::size_t n = scores.size();
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  uint64_t total_pos = 0;
  for (uint8_t l : labels) total_pos += l;
  const uint64_t total_neg = n - total_pos;

  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  uint64_t tp = 0;
  uint64_t fp = 0;
  std::size_t i = 0;
  while (i < n) {
    const double thr = scores[order[i]];
    std::size_t j = i;
    while (j < n && scores[order[j]] == thr) {
      tp += labels[order[j]];
      fp += 1 - labels[order[j]];
      ++j;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(total_neg),
                     static_cast<double>(tp) / static_cast<double>(total_pos),
                     thr});
    i = j;
  }
  return curve;
}

inline double trapezoid_auc(const std::vector<RocPoint>& curve) {
  require(curve.size() >= 2, "curve needs at least two vertices");
  double area = 0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    area += (curve[k].fpr - curve[k - 1].fpr) *
            (curve[k].tpr + curve[k - 1].tpr) * 0.5;
  }
  return area;
}

// Rank form of the area: sort once, hand each tie group its doubled midrank
// (a + b stays integral), then AUC = (S - n1(n1+1)) / (2 n1 n0). Integer
// bookkeeping throughout, so equal inputs give equal bits regardless of
// the original sample order.
inline double auc(const std::vector<double>& scores,
                  const std::vector<uint8_t>& labels) {
  detail::check_scored_labels(scores, labels);
  const std::size_t n = scores.size();
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return scores[a] < scores[b];
  });

  uint64_t n_pos = 0;
  uint64_t doubled_rank_sum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    uint64_t group_pos = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      group_pos += labels[order[j]];
      ++j;
    }
    // 1-based positions i+1 .. j share midrank (i+1+j)/2.
    doubled_rank_sum += group_pos * static_cast<uint64_t>(i + 1 + j);
    n_pos += group_pos;
    i = j;
  }
  const uint64_t n_neg = n - n_pos;
  const uint64_t numer = doubled_rank_sum - n_pos * (n_pos + 1);
  return static_cast<double>(numer) /
         (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Several label sets against one score vector, sharing a single sort. The
// rank arithmetic only ever sees tie-group boundaries and per-group positive
// counts, so each entry carries exactly the bits auc() would produce.
inline std::vector<double> auc_multi(
    const std::vector<double>& scores,
    const std::vector<const std::vector<uint8_t>*>& labelsets) {
  require(!labelsets.empty(), "no label sets given");
  for (const auto* l : labelsets) detail::check_scored_labels(scores, *l);
  const std::size_t n = scores.size();
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return scores[a] < scores[b];
  });

  std::vector<double> out(labelsets.size());
  for (std::size_t set = 0; set < labelsets.size(); ++set) {
    const std::vector<uint8_t>& labels = *labelsets[set];
    uint64_t n_pos = 0;
    uint64_t doubled_rank_sum = 0;
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      uint64_t group_pos = 0;
      while (j < n && scores[order[j]] == scores[order[i]]) {
        group_pos += labels[order[j]];
        ++j;
      }
      doubled_rank_sum += group_pos * static_cast<uint64_t>(i + 1 + j);
      n_pos += group_pos;
      i = j;
    }
    const uint64_t n_neg = n - n_pos;
    const uint64_t numer = doubled_rank_sum - n_pos * (n_pos + 1);
    out[set] = static_cast<double>(numer) /
               (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
  }
  return out;
}

// Energy form of the continuous ranked probability score for an ensemble
// treated as its empirical distribution:
//   mean |x_i - y| - (1/2) mean |x_i - x_j|
// The pairwise term is kept verbatim; n stays small here.
inline double crps_ensemble(const std::vector<double>& members, double truth) {
  require(!members.empty(), "crps needs at least one member");
  require(std::isfinite(truth), "truth must be finite");
  for (double m : members) require(std::isfinite(m), "members must be finite");
  const double n = static_cast<double>(members.size());
  double dev = 0;
  for (double m : members) dev += std::abs(m - truth);
  double spread = 0;
  for (double a : members)
    for (double b : members) spread += std::abs(a - b);
  return dev / n - spread / (2.0 * n * n);
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
  require(!a.empty(), "rmse needs data");
  require(a.size() == b.size(), "rmse inputs must align");
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

}  // namespace powercast
