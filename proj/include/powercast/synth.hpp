// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "powercast/climatology.hpp"
#include "powercast/date.hpp"
#include "powercast/error.hpp"
#include "powercast/grid.hpp"
#include "powercast/noise.hpp"
#include "powercast/parallel.hpp"
#include "powercast/rng.hpp"

namespace powercast {

// Seed-stream tags so the truth innovations, the volatility driver and the
// forecast perturbations never collide.
inline constexpr uint64_t kStreamEta = 1;
inline constexpr uint64_t kStreamVol = 2;
inline constexpr uint64_t kStreamMember = 3;

// Samples unit-variance noise fields at the cell centers of one grid.
// Normalization is analytic per cell: the lattice construction gives every
// point a closed-form variance, so dividing by its square root makes each
// cell's marginal variance exactly 1, node-adjacent cells included.
class FieldSampler {
 public:
  FieldSampler(GridSpec grid, FractalSpec spec)
      : grid_(grid), spec_(std::move(spec)) {
    validate_fractal(spec_);
    const std::size_t cells = grid_.cells();
    pts_.resize(cells);
    inv_std_.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      CubePoint& p = pts_[i];
      sphere_cube_point(cell_center_vec(grid_, cell_coord(grid_, i)), p.x, p.y,
                        p.z);
      const double var = fractal3_point_variance(p.x, p.y, p.z, spec_);
      require(var > 0.0,
              "a noise lattice node coincides with a grid cell center; "
              "change the grid resolution or the base frequency");
      inv_std_[i] = 1.0 / std::sqrt(var);
    }
  }

  const GridSpec& grid() const { return grid_; }
  const FractalSpec& spec() const { return spec_; }

  Field sample(uint64_t seed, int threads = 1) const {
    const FractalField ff = build_fractal(spec_, seed);
    Field out(grid_);
    parallel_for(pts_.size(), threads, [&](std::size_t i) {
      const CubePoint& p = pts_[i];
      out.v[i] = fractal3(p.x, p.y, p.z, ff) * inv_std_[i];
    });
    return out;
  }

 private:
  struct CubePoint {
    double x = 0, y = 0, z = 0;
  };

  GridSpec grid_;
  FractalSpec spec_;
  std::vector<CubePoint> pts_;
  std::vector<double> inv_std_;
};

// Daily anomaly process: AR(1) in time, spatially correlated innovations,
// and a slowly varying volatility field that scales the innovations. The
// volatility path is the regime signal a skilled forecaster can exploit;
// vol_strength 0 switches it off and leaves a plain unit-variance AR(1).
struct TruthProcess {
  GridSpec grid{8};
  double rho = 0.8;
  FractalSpec spatial = standard_fractal(4, 3, 0.5);
  double vol_strength = 0.6;
  double vol_persist = 0.95;
  uint64_t seed = 0;
  int days = 0;
  Date start{2000, 1, 1};
};

struct TruthSeries {
  GridSpec grid{2};
  double rho = 0.0;
  std::vector<DatedField> x;  // anomalies
  std::vector<Field> vol;     // innovation scale s_d, same length as x

  int days() const { return static_cast<int>(x.size()); }
};

inline void validate_process(const TruthProcess& p) {
  require(p.rho > 0.0 && p.rho < 1.0, "rho must lie in (0, 1)");
  require(p.days >= 1, "need at least one day");
  require(p.vol_strength >= 0.0, "vol-strength must be non-negative");
  require(p.vol_persist >= 0.0 && p.vol_persist < 1.0,
          "vol-persist must lie in [0, 1)");
  validate_date(p.start);
  validate_fractal(p.spatial);
}

// Innovation scale from the volatility state: variance 1 + a·u, floored
// well above zero so deep negative swings cannot kill a cell.
inline double vol_scale(double u, double strength) {
  return std::sqrt(std::max(1.0 + strength * u, 0.05));
}

inline TruthSeries gen_truth(const TruthProcess& proc, int threads = 1) {
  validate_process(proc);
  const FieldSampler sampler(proc.grid, proc.spatial);
  const std::size_t cells = proc.grid.cells();
  const double innov = std::sqrt(1.0 - proc.rho * proc.rho);
  const double vol_innov =
      std::sqrt(1.0 - proc.vol_persist * proc.vol_persist);

  TruthSeries out;
  out.grid = proc.grid;
  out.rho = proc.rho;
  out.x.reserve(proc.days);
  out.vol.reserve(proc.days);

  std::vector<double> u(cells, 0.0);  // volatility state
  Date date = proc.start;
  for (int d = 0; d < proc.days; ++d) {
    const Field eta =
        sampler.sample(derive_seed(proc.seed, kStreamEta, d, 0), threads);
    const Field w =
        sampler.sample(derive_seed(proc.seed, kStreamVol, d, 0), threads);
    Field s(proc.grid);
    Field x(proc.grid);
    const Field* prev = d > 0 ? &out.x.back().field : nullptr;
    parallel_for(cells, threads, [&](std::size_t i) {
      u[i] = d == 0 ? w.v[i] : proc.vol_persist * u[i] + vol_innov * w.v[i];
      s.v[i] = vol_scale(u[i], proc.vol_strength);
      x.v[i] = d == 0 ? s.v[i] * eta.v[i]
                      : proc.rho * prev->v[i] + innov * s.v[i] * eta.v[i];
    });
    out.x.push_back({date, std::move(x)});
    out.vol.push_back(std::move(s));
    date = next_day(date);
  }
  return out;
}

struct ForecastConfig {
  int n_members = 50;
  double beta = 1.0;
  // Perturbations default to a single octave: members are drawn by the
  // hundred thousand and one lattice per member is the dominant cost.
  FractalSpec perturbation = standard_fractal(4, 1, 0.5);
  uint64_t seed = 0;
};

struct EnsembleForecast {
  int day = 0;   // issue day index
  int lead = 0;  // days ahead
  std::vector<Field> members;
};

// Forecaster with knowledge of the current state and of the volatility
// path over the forecast window: member i at lead L is
//   rho^L x_d  +  beta * Sigma(d, L) * eps_i
// where Sigma is the conditional spread of the truth process accumulated
// from the realized volatilities, and eps_i is a fresh unit-variance
// spatially correlated field. beta = 1 reproduces the exact conditional
// law; beta < 1 under-disperses.
class Forecaster {
 public:
  Forecaster(const TruthSeries& series, ForecastConfig cfg)
      : series_(&series),
        cfg_(std::move(cfg)),
        sampler_(series.grid, cfg_.perturbation) {
    require(cfg_.n_members >= 1, "need at least one member");
    require(cfg_.beta >= 0.0, "beta must be non-negative");
    require(series.days() > 0, "truth series is empty");
  }

  const ForecastConfig& config() const { return cfg_; }

  // Conditional spread of the truth at day + lead given day, per cell.
  Field sigma(int day, int lead) const {
    check_range(day, lead);
    const double rho2 = series_->rho * series_->rho;
    Field var(series_->grid);
    for (int j = 1; j <= lead; ++j) {
      const Field& s = series_->vol[static_cast<std::size_t>(day + j)];
      for (std::size_t i = 0; i < var.v.size(); ++i)
        var.v[i] = rho2 * var.v[i] + (1.0 - rho2) * s.v[i] * s.v[i];
    }
    for (double& v : var.v) v = std::sqrt(v);
    return var;
  }

  EnsembleForecast members(int day, int lead, int threads = 1) const {
    check_range(day, lead);
    const double decay = std::pow(series_->rho, lead);
    const Field spread = sigma(day, lead);
    const Field& base = series_->x[static_cast<std::size_t>(day)].field;

    EnsembleForecast out;
    out.day = day;
    out.lead = lead;
    out.members.assign(cfg_.n_members, Field(series_->grid));
    const uint64_t key =
        static_cast<uint64_t>(day) * 4096 + static_cast<uint64_t>(lead);
    parallel_for(cfg_.n_members, threads, [&](std::size_t m) {
      const Field eps =
          sampler_.sample(derive_seed(cfg_.seed, kStreamMember, key, m));
      Field& dst = out.members[m];
      for (std::size_t i = 0; i < dst.v.size(); ++i)
        dst.v[i] = decay * base.v[i] + cfg_.beta * spread.v[i] * eps.v[i];
    });
    return out;
  }

 private:
  void check_range(int day, int lead) const {
    require(lead >= 1, "lead must be at least 1");
    require(day >= 0 && day + lead < series_->days(),
            "forecast window leaves the truth series");
  }

  const TruthSeries* series_;
  ForecastConfig cfg_;
  FieldSampler sampler_;
};

inline Field persistence_forecast(const TruthSeries& series, int day,
                                  int lead) {
  require(lead >= 1, "lead must be at least 1");
  require(day >= 0 && day < series.days(), "issue day outside the series");
  return series.x[static_cast<std::size_t>(day)].field;
}

inline Field climatology_forecast(const GridSpec& grid) {
  return Field(grid);  // the zero anomaly
}

}  // namespace powercast
