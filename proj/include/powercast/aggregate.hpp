// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "powercast/error.hpp"
#include "powercast/normal.hpp"

namespace powercast {

// Distinguished exponent for max aggregation.
inline constexpr double kPowerInf = std::numeric_limits<double>::infinity();

inline std::vector<double> member_scores(const std::vector<double>& anoms) {
  require(!anoms.empty(), "member_scores needs at least one anomaly");
  std::vector<double> s(anoms.size());
  for (std::size_t i = 0; i < anoms.size(); ++i) s[i] = phi(anoms[i]);
  return s;
}

namespace detail {

// Power-mean core on ln(score) values. Direct exp below p = 32; log-domain
// log-sum-exp at and above, where score^p underflows. A zero score has
// ln = -inf and drops out of either path on its own since exp(-inf) = 0.
template <typename LnAt>
double power_mean_lns(LnAt&& ln_at, std::size_t n, double p) {
  if (p < 32.0) {
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += std::exp(p * ln_at(i));
    const double mean = acc / static_cast<double>(n);
    if (mean == 0) return 0;
    return std::exp(std::log(mean) / p);
  }
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, ln_at(i));
  if (m == -std::numeric_limits<double>::infinity()) return 0;  // all scores zero
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(p * (ln_at(i) - m));
  return std::exp(m + std::log(acc / static_cast<double>(n)) / p);
}

}  // namespace detail

// ((1/n) sum s_i^p)^(1/p); p = 1 is the plain mean and p = inf the maximum.
inline double power_mean(const std::vector<double>& scores, double p) {
  require(!scores.empty(), "power_mean needs at least one score");
  require(p >= 1.0, "power exponent must be at least 1");
  for (double s : scores)
    require(s >= 0.0 && s <= 1.0, "member scores must lie in [0, 1]");

  if (p == kPowerInf) return *std::max_element(scores.begin(), scores.end());
  if (p == 1.0) {
    double acc = 0;
    for (double s : scores) acc += s;
    return acc / static_cast<double>(scores.size());
  }
  return detail::power_mean_lns([&](std::size_t i) { return std::log(scores[i]); },
                                scores.size(), p);
}

// Same mean over one row of precomputed float ln(score) values. The sweep
// and the lead evaluation both funnel through here so a dataset pooled twice
// with the same p lands on identical bits.
inline double power_mean_row(const float* lns, int n, double p) {
  if (p == kPowerInf) {
    float m = -std::numeric_limits<float>::infinity();
    for (int i = 0; i < n; ++i) m = std::max(m, lns[i]);
    return std::exp(static_cast<double>(m));
  }
  return detail::power_mean_lns(
      [&](std::size_t i) { return static_cast<double>(lns[i]); },
      static_cast<std::size_t>(n), p);
}

// Baseline: pool the anomalies first, then score the pooled value.
inline double mean_prediction_score(const std::vector<double>& anoms) {
  require(!anoms.empty(), "mean_prediction_score needs at least one anomaly");
  double acc = 0;
  for (double a : anoms) acc += a;
  return phi(acc / static_cast<double>(anoms.size()));
}

inline int binarize(double score, double tau) {
  require(tau >= 0.0 && tau <= 1.0, "threshold must lie in [0, 1]");
  require(std::isfinite(score), "score must be finite");
  return score >= tau ? 1 : 0;
}

}  // namespace powercast
