// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.
//
// Independent reference implementations used only by tests. Everything here
// favors obviously-correct math over speed and shares no code with the
// library paths it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracles {

// erf via its Taylor series; adequate for |x| <= 3 where the terms shrink
// fast enough for double accumulation.
inline double erf_series(double x) {
  const double x2 = x * x;
  double term = x;  // x^(2k+1) / k!
  double sum = 0;
  for (int k = 0; k < 60; ++k) {
    sum += (k % 2 == 0 ? term : -term) / (2 * k + 1);
    term *= x2 / (k + 1);
  }
  return sum * 2.0 / std::sqrt(std::acos(-1.0));
}

// erfc for x >= 3 via the classical continued fraction, evaluated with the
// modified Lentz algorithm: erfc(x) e^{x^2} sqrt(pi) = 1/(x+) (1/2)/(x+) ...
inline double erfc_fraction(double x) {
  const double tiny = 1e-300;
  double f = tiny, c = f, d = 0;
  for (int n = 1; n < 300; ++n) {
    const double a = n == 1 ? 1.0 : (n - 1) / 2.0;
    const double b = n == 1 ? x : x;
    d = b + a * d;
    if (d == 0) d = tiny;
    c = b + a / c;
    if (c == 0) c = tiny;
    d = 1 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return std::exp(-x * x) / std::sqrt(std::acos(-1.0)) * f;
}

inline double erfc_oracle(double x) {
  if (x < 0) return 2.0 - erfc_oracle(-x);
  if (x < 3.0) return 1.0 - erf_series(x);
  return erfc_fraction(x);
}

inline double phi_oracle(double x) { return 0.5 * erfc_oracle(-x / std::sqrt(2.0)); }

inline double phi_inv_oracle(double p) {
  double lo = -10, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi_oracle(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Mann-Whitney statistic by brute-force pair counting, ties worth 1/2.
inline double mw_auc_oracle(const std::vector<double>& scores,
                            const std::vector<int>& labels) {
  double wins = 0;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    ++n_pos;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == 1) continue;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  for (int l : labels)
    if (l != 1) ++n_neg;
  return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// CRPS of the empirical ensemble CDF by exact piecewise integration of
// (F(t) - 1{t >= x})^2: the integrand is constant between breakpoints.
inline double crps_integral_oracle(std::vector<double> members, double x) {
  std::sort(members.begin(), members.end());
  std::vector<double> bp = members;
  bp.push_back(x);
  std::sort(bp.begin(), bp.end());
  const double n = static_cast<double>(members.size());
  double total = 0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double a = bp[i], b = bp[i + 1];
    if (!(b > a)) continue;
    const double below =
        static_cast<double>(std::upper_bound(members.begin(), members.end(), a) -
                            members.begin());
    const double f = below / n;
    const double h = a >= x ? 1.0 : 0.0;
    total += (f - h) * (f - h) * (b - a);
  }
  return total;
}

}  // namespace oracles
