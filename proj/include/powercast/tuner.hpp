// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "powercast/aggregate.hpp"
#include "powercast/error.hpp"
#include "powercast/metrics.hpp"
#include "powercast/parallel.hpp"

namespace powercast {

// 61 log-spaced exponents from 1 to 1000. exp(0) guarantees an exact 1 up
// front, which the sweep relies on for its "never worse than the plain
// mean" property.
inline std::vector<double> default_p_grid() {
  std::vector<double> g(61);
  const double step = std::log(1000.0) / 60.0;
  for (int k = 0; k < 61; ++k) g[k] = std::exp(step * static_cast<double>(k));
  return g;
}

inline void validate_p_grid(const std::vector<double>& grid) {
  require(!grid.empty(), "p grid is empty");
  require(grid.front() == 1.0, "p grid must start at exactly 1");
  for (std::size_t k = 1; k < grid.size(); ++k)
    require(grid[k] > grid[k - 1], "p grid must increase strictly");
}

// Everything the sweep and the lead evaluation consume, one sample per
// (day, cell): member scores in log space plus the baseline scorers and
// the exceedance labels per quantile.
struct ScoreDataset {
  int n_members = 0;
  std::size_t n_samples = 0;
  std::vector<float> ln_scores;     // n_samples rows of n_members floats
  std::vector<double> mean_pred;    // score of the pooled anomaly
  std::vector<double> persistence;  // scored persistence baseline
  std::vector<double> climatology;  // scored climatology baseline
  std::vector<double> quantiles;
  std::vector<std::vector<uint8_t>> labels;  // [quantile][sample]

  const std::vector<uint8_t>& labels_for(double q) const {
    for (std::size_t i = 0; i < quantiles.size(); ++i)
      if (quantiles[i] == q) return labels[i];
    throw ValidationError("no labels for the requested quantile");
  }
};

inline void validate_dataset(const ScoreDataset& ds) {
  require(ds.n_members >= 1, "dataset needs members");
  require(ds.n_samples >= 2, "dataset needs at least two samples");
  require(ds.ln_scores.size() == ds.n_samples * ds.n_members,
          "member score block has the wrong shape");
  require(ds.mean_pred.size() == ds.n_samples,
          "mean-prediction scores have the wrong shape");
  require(ds.quantiles.size() == ds.labels.size(),
          "quantiles and label sets must align");
  for (const auto& l : ds.labels)
    require(l.size() == ds.n_samples, "label set has the wrong shape");
}

// Pooled score per sample at one exponent.
inline void pooled_scores(const ScoreDataset& ds, double p,
                          std::vector<double>& out, int threads = 1) {
  out.resize(ds.n_samples);
  parallel_for(ds.n_samples, threads, [&](std::size_t s) {
    out[s] = power_mean_row(ds.ln_scores.data() + s * ds.n_members,
                            ds.n_members, p);
  });
}

struct SweepReport {
  double q = 0;
  std::vector<std::pair<double, double>> auc_by_p;  // (p, AUC), grid order
  double p_opt = 1;
  double auc_opt = 0;
  double auc_mean_pred = 0;
  double ri_opt = 0;  // percent improvement of auc_opt over auc_mean_pred
};

namespace detail {

// Pooling at an exponent costs far more than scoring a label set against the
// pooled values, so one pass over the grid serves every requested quantile.
inline std::vector<SweepReport> sweep_core(const ScoreDataset& ds,
                                           const std::vector<double>& grid,
                                           const std::vector<std::size_t>& qs,
                                           int threads) {
  validate_dataset(ds);
  validate_p_grid(grid);
  std::vector<const std::vector<uint8_t>*> sets(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) sets[i] = &ds.labels[qs[i]];

  std::vector<SweepReport> reps(qs.size());
  for (auto& rep : reps) rep.auc_by_p.assign(grid.size(), {0.0, 0.0});
  parallel_for(grid.size(), threads, [&](std::size_t k) {
    std::vector<double> scores;
    pooled_scores(ds, grid[k], scores);
    const std::vector<double> areas = auc_multi(scores, sets);
    for (std::size_t i = 0; i < qs.size(); ++i)
      reps[i].auc_by_p[k] = {grid[k], areas[i]};
  });

  for (std::size_t i = 0; i < qs.size(); ++i) {
    SweepReport& rep = reps[i];
    rep.q = ds.quantiles[qs[i]];
    std::size_t best = 0;
    for (std::size_t k = 1; k < grid.size(); ++k)
      if (rep.auc_by_p[k].second > rep.auc_by_p[best].second) best = k;
    rep.p_opt = rep.auc_by_p[best].first;
    rep.auc_opt = rep.auc_by_p[best].second;
    rep.auc_mean_pred = auc(ds.mean_pred, *sets[i]);
    rep.ri_opt = 100.0 * (rep.auc_opt - rep.auc_mean_pred) / rep.auc_mean_pred;
  }
  return reps;
}

}  // namespace detail

inline SweepReport sweep_p(const ScoreDataset& ds, double q,
                           const std::vector<double>& grid, int threads = 1) {
  for (std::size_t i = 0; i < ds.quantiles.size(); ++i)
    if (ds.quantiles[i] == q)
      return detail::sweep_core(ds, grid, {i}, threads)[0];
  throw ValidationError("no labels for the requested quantile");
}

// Sweep every quantile the dataset carries in one shared pass.
inline std::vector<SweepReport> sweep_all(const ScoreDataset& ds,
                                          const std::vector<double>& grid,
                                          int threads = 1) {
  require(!ds.quantiles.empty(), "dataset carries no quantiles");
  std::vector<std::size_t> qs(ds.quantiles.size());
  std::iota(qs.begin(), qs.end(), 0);
  return detail::sweep_core(ds, grid, qs, threads);
}

// Optional local refinement between the sweep argmax's neighbors. AUC is a
// step function of p, so this settles on a plateau near the grid optimum;
// the result is reported alongside the grid answer, never in its place.
struct RefineResult {
  double p = 1;
  double auc = 0;
};

inline RefineResult refine_p_opt(const ScoreDataset& ds, double q, double lo,
                                 double hi, int iterations = 40,
                                 int threads = 1) {
  validate_dataset(ds);
  require(lo >= 1.0 && hi > lo, "refinement interval must sit above p = 1");
  const std::vector<uint8_t>& labels = ds.labels_for(q);
  std::vector<double> scores;
  const auto eval = [&](double p) {
    pooled_scores(ds, p, scores, threads);
    return auc(scores, labels);
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 >= f2) {  // keep the smaller-p side on ties
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = eval(x2);
    }
  }
  return f1 >= f2 ? RefineResult{x1, f1} : RefineResult{x2, f2};
}

struct ExponentialFit {
  double a = 0;  // slope of ln(p_opt) on q
  double b = 0;  // intercept
  double r_squared = 0;
};

inline ExponentialFit fit_exponential(
    const std::vector<std::pair<double, double>>& points) {
  require(points.size() >= 2, "need at least two (q, p_opt) points");
  bool distinct = false;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].first != points[0].first) distinct = true;
  require(distinct, "need at least two distinct quantiles");
  for (const auto& [q, p] : points)
    require(p >= 1.0, "p_opt must be at least 1");

  const double n = static_cast<double>(points.size());
  double qm = 0, ym = 0;
  for (const auto& [q, p] : points) {
    qm += q;
    ym += std::log(p);
  }
  qm /= n;
  ym /= n;
  double sqq = 0, sqy = 0, syy = 0;
  for (const auto& [q, p] : points) {
    const double dq = q - qm;
    const double dy = std::log(p) - ym;
    sqq += dq * dq;
    sqy += dq * dy;
    syy += dy * dy;
  }
  ExponentialFit fit;
  fit.a = sqy / sqq;
  fit.b = ym - fit.a * qm;
  if (syy == 0) {
    fit.r_squared = 1.0;  // constant data is fit exactly
  } else {
    double ss_res = 0;
    for (const auto& [q, p] : points) {
      const double r = std::log(p) - (fit.a * q + fit.b);
      ss_res += r * r;
    }
    fit.r_squared = 1.0 - ss_res / syy;
    if (fit.r_squared < 0) fit.r_squared = 0;
    if (fit.r_squared > 1) fit.r_squared = 1;
  }
  return fit;
}

inline double predict_p_opt(const ExponentialFit& fit, double q) {
  require(q >= 0.5 && q < 1.0, "quantile must lie in [0.5, 1)");
  return std::max(1.0, std::exp(fit.a * q + fit.b));
}

struct LeadCurve {
  std::vector<int> leads;
  std::vector<double> power_mean_auc;
  std::vector<double> mean_pred_auc;
  std::vector<double> persistence_auc;
  std::vector<double> climatology_auc;
};

// The four method AUCs of one lead's dataset at a fixed exponent.
struct LeadPoint {
  double power_mean = 0;
  double mean_pred = 0;
  double persistence = 0;
  double climatology = 0;
};

inline LeadPoint evaluate_lead_point(const ScoreDataset& ds, double q,
                                     double p, int threads = 1) {
  validate_dataset(ds);
  require(p >= 1.0, "power exponent must be at least 1");
  require(ds.persistence.size() == ds.n_samples,
          "lead evaluation needs persistence scores");
  require(ds.climatology.size() == ds.n_samples,
          "lead evaluation needs climatology scores");
  const std::vector<uint8_t>& labels = ds.labels_for(q);
  std::vector<double> scores;
  pooled_scores(ds, p, scores, threads);
  LeadPoint pt;
  pt.power_mean = auc(scores, labels);
  pt.mean_pred = auc(ds.mean_pred, labels);
  pt.persistence = auc(ds.persistence, labels);
  pt.climatology = auc(ds.climatology, labels);
  return pt;
}

inline LeadCurve evaluate_leads(const std::vector<ScoreDataset>& datasets,
                                const std::vector<int>& leads, double q,
                                double p, int threads = 1) {
  require(!datasets.empty(), "no datasets to evaluate");
  require(datasets.size() == leads.size(),
          "one dataset per requested lead is required");
  LeadCurve curve;
  curve.leads = leads;
  for (const ScoreDataset& ds : datasets) {
    const LeadPoint pt = evaluate_lead_point(ds, q, p, threads);
    curve.power_mean_auc.push_back(pt.power_mean);
    curve.mean_pred_auc.push_back(pt.mean_pred);
    curve.persistence_auc.push_back(pt.persistence);
    curve.climatology_auc.push_back(pt.climatology);
  }
  return curve;
}

}  // namespace powercast
