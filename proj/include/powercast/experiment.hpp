// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "powercast/climatology.hpp"
#include "powercast/synth.hpp"
#include "powercast/tuner.hpp"

namespace powercast {

// One knob set for a full run: world, forecaster, split, sweep and report.
struct ExperimentConfig {
  int grid_n = 8;
  int train_days = 3000;
  int valid_days = 1000;
  double rho = 0.8;
  double vol_strength = 0.6;
  double vol_persist = 0.95;
  int base_frequency = 4;
  int octaves = 3;
  double sigma_ln = 0.5;
  int perturb_octaves = 1;

  int n_members = 50;
  double beta = 0.6;

  int window_days = 31;
  std::vector<int> leads = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  int sweep_lead = 7;
  std::vector<double> quantiles = {0.8, 0.85, 0.9, 0.95, 0.98};
  double lead_q = 0.98;
  std::vector<double> p_grid = default_p_grid();
  bool refine = false;

  uint64_t seed = 0;
  Date start{2000, 1, 1};
};

inline void validate_experiment(const ExperimentConfig& cfg) {
  require(cfg.train_days >= 366, "training period must span at least a year");
  require(cfg.valid_days >= 1, "validation period is empty");
  require(!cfg.quantiles.empty(), "need at least one quantile");
  for (double q : cfg.quantiles)
    require(q >= 0.5 && q < 1.0, "quantiles must lie in [0.5, 1)");
  require(!cfg.leads.empty(), "need at least one lead");
  for (int l : cfg.leads) require(l >= 1, "leads must be at least 1");
  require(cfg.sweep_lead >= 1, "sweep lead must be at least 1");
  validate_p_grid(cfg.p_grid);
  bool has_lead_q = false;
  for (double q : cfg.quantiles) has_lead_q = has_lead_q || q == cfg.lead_q;
  require(has_lead_q, "lead-curve quantile must be one of the quantiles");
}

inline TruthProcess truth_process_of(const ExperimentConfig& cfg) {
  TruthProcess proc;
  proc.grid = GridSpec(cfg.grid_n);
  proc.rho = cfg.rho;
  proc.spatial = standard_fractal(cfg.base_frequency, cfg.octaves, cfg.sigma_ln);
  proc.vol_strength = cfg.vol_strength;
  proc.vol_persist = cfg.vol_persist;
  proc.seed = cfg.seed;
  proc.days = cfg.train_days + cfg.valid_days;
  proc.start = cfg.start;
  return proc;
}

inline ForecastConfig forecast_config_of(const ExperimentConfig& cfg) {
  ForecastConfig fc;
  fc.n_members = cfg.n_members;
  fc.beta = cfg.beta;
  fc.perturbation =
      standard_fractal(cfg.base_frequency, cfg.perturb_octaves, cfg.sigma_ln);
  fc.seed = derive_seed(cfg.seed, kStreamMember, 0, 0);
  return fc;
}

// Serves the member fields of the forecast valid at index (valid_day, lead);
// the issue day is valid_day - lead. Lets the dataset builder run off either
// a live forecaster or fields loaded from disk.
using MemberSource = std::function<std::vector<Field>(int valid_day, int lead)>;

inline MemberSource live_member_source(const Forecaster& fc, int threads) {
  return [&fc, threads](int valid_day, int lead) {
    return fc.members(valid_day - lead, lead, threads).members;
  };
}

// A dataset for one lead plus the raw-space RMSE summaries that fall out of
// the same pass.
struct BuiltDataset {
  ScoreDataset scores;
  double rmse_ensemble = 0;
  double rmse_persistence = 0;
  double rmse_climatology = 0;
};

// Scores every (valid day, cell) sample of one lead: member scores in log
// space, the three baseline scorers, exceedance labels per quantile, and
// raw anomaly errors. Sample order is day-major, then cell.
inline BuiltDataset build_dataset(const TruthSeries& truth,
                                  const Climatology& clim,
                                  const MemberSource& members, int lead,
                                  int valid_start, int valid_days,
                                  const std::vector<double>& quantiles,
                                  int threads = 1) {
  require(lead >= 1, "lead must be at least 1");
  require(valid_days >= 1, "validation window is empty");
  require(valid_start - lead >= 0, "first issue day precedes the series");
  require(valid_start + valid_days <= truth.days(),
          "validation window leaves the truth series");
  require(truth.grid == clim.spec, "climatology grid does not match");
  require(!quantiles.empty(), "need at least one quantile");

  const std::size_t cells = truth.grid.cells();
  const std::size_t n_samples = static_cast<std::size_t>(valid_days) * cells;

  BuiltDataset out;
  ScoreDataset& ds = out.scores;
  ds.n_samples = n_samples;
  ds.mean_pred.resize(n_samples);
  ds.persistence.resize(n_samples);
  ds.climatology.resize(n_samples);
  ds.quantiles = quantiles;
  ds.labels.assign(quantiles.size(), std::vector<uint8_t>(n_samples, 0));

  std::vector<double> z(quantiles.size());
  for (std::size_t i = 0; i < quantiles.size(); ++i) {
    require(quantiles[i] >= 0.5 && quantiles[i] < 1.0,
            "quantiles must lie in [0.5, 1)");
    z[i] = phi_inv(quantiles[i]);
  }

  double se_ens = 0, se_pers = 0, se_clim = 0;
  for (int v = 0; v < valid_days; ++v) {
    const int valid_day = valid_start + v;
    const std::vector<Field> member_fields = members(valid_day, lead);
    if (v == 0) {
      ds.n_members = static_cast<int>(member_fields.size());
      require(ds.n_members >= 1, "member source returned no members");
      ds.ln_scores.resize(n_samples * ds.n_members);
    }
    require(static_cast<int>(member_fields.size()) == ds.n_members,
            "member count changed between days");

    const Field& xv = truth.x[valid_day].field;
    const Field& xd = truth.x[valid_day - lead].field;
    const int doy = day_of_year_index(truth.x[valid_day].date);
    const std::size_t base_sample = static_cast<std::size_t>(v) * cells;

    parallel_for(cells, threads, [&](std::size_t c) {
      const double mu = clim.mu_at(doy, c);
      const double inv_sigma = 1.0 / clim.sigma_at(doy, c);
      const std::size_t s = base_sample + c;

      float* lns = ds.ln_scores.data() + s * ds.n_members;
      double sum = 0;
      for (int m = 0; m < ds.n_members; ++m) {
        const double raw = member_fields[m].v[c];
        sum += raw;
        lns[m] = static_cast<float>(std::log(phi((raw - mu) * inv_sigma)));
      }
      const double ens_mean = sum / ds.n_members;
      ds.mean_pred[s] = phi((ens_mean - mu) * inv_sigma);
      ds.persistence[s] = phi((xd.v[c] - mu) * inv_sigma);
      // the climatology forecast is the fitted mean itself, so its anomaly
      // is zero by construction and its score never varies
      ds.climatology[s] = 0.5;

      const double anom = (xv.v[c] - mu) * inv_sigma;
      for (std::size_t i = 0; i < z.size(); ++i)
        ds.labels[i][s] = anom >= z[i] ? 1 : 0;
    });

    // squared errors in the truth's own (anomaly) units, serial for a
    // reproducible sum; rescaling by the fitted sigma would only add
    // estimation noise on top of an already standardized process
    for (std::size_t c = 0; c < cells; ++c) {
      double sum = 0;
      for (int m = 0; m < ds.n_members; ++m) sum += member_fields[m].v[c];
      const double e_ens = sum / ds.n_members - xv.v[c];
      const double e_pers = xd.v[c] - xv.v[c];
      se_ens += e_ens * e_ens;
      se_pers += e_pers * e_pers;
      se_clim += xv.v[c] * xv.v[c];
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n_samples);
  out.rmse_ensemble = std::sqrt(se_ens * inv_n);
  out.rmse_persistence = std::sqrt(se_pers * inv_n);
  out.rmse_climatology = std::sqrt(se_clim * inv_n);
  return out;
}

struct RmseCurve {
  std::vector<int> leads;
  std::vector<double> ensemble;
  std::vector<double> persistence;
  std::vector<double> climatology;
};

// Full in-memory pipeline result; io-cli turns this into files.
struct ReportBundle {
  std::vector<SweepReport> sweeps;  // one per quantile, at sweep_lead
  ExponentialFit fit;
  std::vector<RefineResult> refined;  // aligned with sweeps when enabled
  LeadCurve lead_curve;               // at lead_q
  RmseCurve rmse_curve;
};

inline ReportBundle run_report(const ExperimentConfig& cfg, int threads = 1) {
  validate_experiment(cfg);
  const TruthSeries truth = gen_truth(truth_process_of(cfg), threads);
  const Climatology clim = fit_climatology(
      {truth.x.begin(), truth.x.begin() + cfg.train_days}, cfg.window_days,
      threads);
  const Forecaster forecaster(truth, forecast_config_of(cfg));
  const MemberSource source = live_member_source(forecaster, threads);

  ReportBundle bundle;

  const BuiltDataset sweep_ds =
      build_dataset(truth, clim, source, cfg.sweep_lead, cfg.train_days,
                    cfg.valid_days, cfg.quantiles, threads);
  bundle.sweeps = sweep_all(sweep_ds.scores, cfg.p_grid, threads);
  std::vector<std::pair<double, double>> points;
  for (const SweepReport& rep : bundle.sweeps) {
    points.emplace_back(rep.q, rep.p_opt);
    if (cfg.refine) {
      std::size_t k = 0;
      for (std::size_t i = 0; i < rep.auc_by_p.size(); ++i)
        if (rep.auc_by_p[i].first == rep.p_opt) k = i;
      const double lo = k > 0 ? rep.auc_by_p[k - 1].first : rep.p_opt;
      const double hi = k + 1 < rep.auc_by_p.size() ? rep.auc_by_p[k + 1].first
                                                    : rep.p_opt + 1.0;
      bundle.refined.push_back(refine_p_opt(sweep_ds.scores, rep.q,
                                            std::max(1.0, lo), hi, 40,
                                            threads));
    }
  }
  bundle.fit = fit_exponential(points);

  double p_fixed = 1.0;
  for (const SweepReport& rep : bundle.sweeps)
    if (rep.q == cfg.lead_q) p_fixed = rep.p_opt;

  // One lead at a time: a dataset is large, so score it, reduce it to its
  // curve points, and let it go before the next one.
  bundle.lead_curve.leads = cfg.leads;
  bundle.rmse_curve.leads = cfg.leads;
  for (int lead : cfg.leads) {
    const bool reuse = lead == cfg.sweep_lead;
    BuiltDataset built;
    if (!reuse)
      built = build_dataset(truth, clim, source, lead, cfg.train_days,
                            cfg.valid_days, cfg.quantiles, threads);
    const BuiltDataset& use = reuse ? sweep_ds : built;
    const LeadPoint pt =
        evaluate_lead_point(use.scores, cfg.lead_q, p_fixed, threads);
    bundle.lead_curve.power_mean_auc.push_back(pt.power_mean);
    bundle.lead_curve.mean_pred_auc.push_back(pt.mean_pred);
    bundle.lead_curve.persistence_auc.push_back(pt.persistence);
    bundle.lead_curve.climatology_auc.push_back(pt.climatology);
    bundle.rmse_curve.ensemble.push_back(use.rmse_ensemble);
    bundle.rmse_curve.persistence.push_back(use.rmse_persistence);
    bundle.rmse_curve.climatology.push_back(use.rmse_climatology);
  }
  return bundle;
}

}  // namespace powercast
