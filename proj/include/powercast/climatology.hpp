// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "powercast/date.hpp"
#include "powercast/error.hpp"
#include "powercast/grid.hpp"
#include "powercast/normal.hpp"
#include "powercast/parallel.hpp"

namespace powercast {

constexpr double kSigmaFloor = 1e-6;

struct DatedField {
  Date date;
  Field field;
};

// Per-cell, per-day-of-year mean and standard deviation. Storage is
// day-major: slot d covers cells [d*cells, (d+1)*cells).
struct Climatology {
  GridSpec spec;
  int window_days = 31;
  std::vector<double> mu;     // 365 * cells
  std::vector<double> sigma;  // 365 * cells, floored at kSigmaFloor

  double mu_at(int doy, std::size_t cell) const {
    return mu[static_cast<std::size_t>(doy) * spec.cells() + cell];
  }
  double sigma_at(int doy, std::size_t cell) const {
    return sigma[static_cast<std::size_t>(doy) * spec.cells() + cell];
  }
};

// Sample mean/std per (cell, day-of-year) over a circular +-(window-1)/2 day
// window across all years. Inputs are consumed in date order so that the
// result is exactly independent of how the series was arranged.
inline Climatology fit_climatology(const std::vector<DatedField>& series, int window_days,
                                   int threads = 1) {
  require(!series.empty(), "empty climatology input series");
  require(window_days >= 1 && window_days % 2 == 1,
          "window_days must be odd and positive, got " + std::to_string(window_days));
  require(window_days <= 729, "window_days cannot exceed 729");
  const GridSpec spec = series.front().field.spec;
  const std::size_t cells = static_cast<std::size_t>(spec.cells());
  for (const DatedField& df : series) {
    validate_date(df.date);
    require(df.field.spec == spec, "climatology input fields use mixed grids");
  }

  std::vector<std::size_t> order(series.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return series[a].date < series[b].date; });
  for (std::size_t i = 1; i < order.size(); ++i)
    require(series[order[i - 1]].date < series[order[i]].date,
            "duplicate date in climatology input: " + to_string(series[order[i]].date));

  {
    // One leap year of coverage is the hard floor; real use should span two
    // or more full years so every window sees multiple samples.
    const Date first = series[order.front()].date;
    const Date last = series[order.back()].date;
    int span = 0;
    for (Date d = first; d < last && span < 366; d = next_day(d)) ++span;
    if (span < 365)
      throw InsufficientDataError("climatology needs at least a full year of data, got " +
                                  std::to_string(span + 1) + " days");
  }

  // Per-day-of-year accumulators, filled in date order.
  std::vector<double> slot_sum(365 * cells, 0.0), slot_sumsq(365 * cells, 0.0);
  std::vector<long> slot_count(365, 0);
  for (std::size_t i : order) {
    const int doy = day_of_year_index(series[i].date);
    ++slot_count[doy];
    double* sum = slot_sum.data() + static_cast<std::size_t>(doy) * cells;
    double* sumsq = slot_sumsq.data() + static_cast<std::size_t>(doy) * cells;
    const double* v = series[i].field.v.data();
    for (std::size_t c = 0; c < cells; ++c) {
      sum[c] += v[c];
      sumsq[c] += v[c] * v[c];
    }
  }

  Climatology clim{spec, window_days, {}, {}};
  clim.mu.assign(365 * cells, 0.0);
  clim.sigma.assign(365 * cells, kSigmaFloor);
  const int half = (window_days - 1) / 2;

  parallel_for(365, threads, [&](std::size_t doy) {
    std::vector<double> sum(cells, 0.0), sumsq(cells, 0.0);
    long count = 0;
    for (int off = -half; off <= half; ++off) {
      const int d = (static_cast<int>(doy) + off + 730) % 365;
      count += slot_count[d];
      const double* ss = slot_sum.data() + static_cast<std::size_t>(d) * cells;
      const double* qq = slot_sumsq.data() + static_cast<std::size_t>(d) * cells;
      for (std::size_t c = 0; c < cells; ++c) {
        sum[c] += ss[c];
        sumsq[c] += qq[c];
      }
    }
    double* mu = clim.mu.data() + doy * cells;
    double* sigma = clim.sigma.data() + doy * cells;
    for (std::size_t c = 0; c < cells; ++c) {
      if (count < 1) continue;  // empty slot keeps mu 0, sigma floored
      mu[c] = sum[c] / count;
      double var = 0.0;
      if (count > 1) var = (sumsq[c] - sum[c] * sum[c] / count) / (count - 1);
      if (var < 0) var = 0;  // round-off on degenerate inputs
      sigma[c] = std::max(std::sqrt(var), kSigmaFloor);
    }
  });
  return clim;
}

inline Field standardize(const Field& field, const Date& date, const Climatology& clim) {
  require(field.spec == clim.spec, "field and climatology use different grids");
  const int doy = day_of_year_index(date);
  Field out(field.spec);
  const std::size_t cells = field.size();
  for (std::size_t c = 0; c < cells; ++c)
    out.v[c] = (field.v[c] - clim.mu_at(doy, c)) / clim.sigma_at(doy, c);
  return out;
}

struct LabelField {
  double q;
  Field y;  // exactly 0 or 1 per cell
};

// y = 1 wherever the anomaly's CDF value reaches the quantile, i.e. where
// x >= phi_inv(q); the boundary itself counts as an exceedance.
inline LabelField label_extreme(const Field& anoms, double q) {
  require(q >= 0.5 && q < 1.0, "quantile must lie in [0.5, 1)");
  const double threshold = phi_inv(q);
  LabelField out{q, Field(anoms.spec)};
  for (std::size_t c = 0; c < anoms.size(); ++c)
    out.y.v[c] = anoms.v[c] >= threshold ? 1.0 : 0.0;
  return out;
}

}  // namespace powercast
