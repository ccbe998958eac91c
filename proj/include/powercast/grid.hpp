// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "powercast/error.hpp"

namespace powercast {

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(Vec3 v) {
  const double n = norm(v);
  return {v.x / n, v.y / n, v.z / n};
}

// Equiangular gnomonic cube-sphere with N x N cells per face.
struct GridSpec {
  int n;

  explicit GridSpec(int n_) : n(n_) {
    require(n >= 2, "grid resolution must be at least 2, got " + std::to_string(n_));
  }

  int cells() const { return 6 * n * n; }
  bool operator==(const GridSpec& o) const { return n == o.n; }
};

struct CellCoord {
  int face = 0;  // 0..5
  int row = 0;   // 0..N-1
  int col = 0;   // 0..N-1

  bool operator==(const CellCoord&) const = default;
};

struct LatLon {
  double lat = 0;  // degrees, [-90, 90]
  double lon = 0;  // degrees, [0, 360)
};

// Inverse of the face-major flat index used by Field.
inline CellCoord cell_coord(const GridSpec& spec, std::size_t index) {
  const int i = static_cast<int>(index);
  const int n = spec.n;
  return {i / (n * n), (i / n) % n, i % n};
}

// One scalar per cell; the storage order is face, then row, then column.
struct Field {
  GridSpec spec;
  std::vector<double> v;

  explicit Field(GridSpec s) : spec(s), v(static_cast<std::size_t>(s.cells()), 0.0) {}

  std::size_t index(const CellCoord& c) const {
    return (static_cast<std::size_t>(c.face) * spec.n + c.row) * spec.n + c.col;
  }
  double& at(const CellCoord& c) { return v[index(c)]; }
  double at(const CellCoord& c) const { return v[index(c)]; }
  std::size_t size() const { return v.size(); }
};

// Face frames. Faces 0..3 ring the equator with outward axes at longitudes
// 0, 90, 180, 270; face 4 is the north cap, face 5 the south cap. Columns of
// the equatorial faces advance eastward and rows advance northward; the cap
// frames are fixed by the round-trip tests.
inline constexpr Vec3 kFaceAxis[6] = {{1, 0, 0},  {0, 1, 0}, {-1, 0, 0},
                                      {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
inline constexpr Vec3 kFaceU[6] = {{0, 1, 0}, {-1, 0, 0}, {0, -1, 0},
                                   {1, 0, 0}, {0, 1, 0},  {0, 1, 0}};
inline constexpr Vec3 kFaceV[6] = {{0, 0, 1}, {0, 0, 1},  {0, 0, 1},
                                   {0, 0, 1}, {-1, 0, 0}, {1, 0, 0}};

inline void validate_cell(const GridSpec& spec, const CellCoord& c) {
  require(c.face >= 0 && c.face < 6, "face index out of range: " + std::to_string(c.face));
  require(c.row >= 0 && c.row < spec.n, "row index out of range: " + std::to_string(c.row));
  require(c.col >= 0 && c.col < spec.n, "col index out of range: " + std::to_string(c.col));
}

inline void validate_latlon(const LatLon& p) {
  require(p.lat >= -90.0 && p.lat <= 90.0, "latitude out of range");
  require(std::isfinite(p.lon), "longitude must be finite");
}

inline Vec3 unit_vector(const LatLon& p) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double clat = std::cos(p.lat * kRad);
  return {clat * std::cos(p.lon * kRad), clat * std::sin(p.lon * kRad),
          std::sin(p.lat * kRad)};
}

inline LatLon to_latlon(Vec3 v) {
  constexpr double kDeg = 180.0 / std::numbers::pi;
  v = normalized(v);
  double lon = std::atan2(v.y, v.x) * kDeg;
  if (lon < 0) lon += 360.0;
  if (lon >= 360.0) lon = 0.0;
  return {std::asin(std::clamp(v.z, -1.0, 1.0)) * kDeg, lon};
}

inline Vec3 cell_center_vec(const GridSpec& spec, const CellCoord& c) {
  validate_cell(spec, c);
  const double h = (std::numbers::pi / 2.0) / spec.n;
  const double alpha = -std::numbers::pi / 4.0 + (c.row + 0.5) * h;
  const double beta = -std::numbers::pi / 4.0 + (c.col + 0.5) * h;
  return normalized(kFaceAxis[c.face] + std::tan(beta) * kFaceU[c.face] +
                    std::tan(alpha) * kFaceV[c.face]);
}

inline LatLon cell_center(const GridSpec& spec, const CellCoord& c) {
  return to_latlon(cell_center_vec(spec, c));
}

inline CellCoord locate_cell_vec(const GridSpec& spec, Vec3 v) {
  int face = 0;
  double best = dot(v, kFaceAxis[0]);
  for (int f = 1; f < 6; ++f) {
    const double d = dot(v, kFaceAxis[f]);
    if (d > best) {  // ties keep the lowest face index
      best = d;
      face = f;
    }
  }
  const double a = dot(v, kFaceAxis[face]);
  const double alpha = std::atan(dot(v, kFaceV[face]) / a);
  const double beta = std::atan(dot(v, kFaceU[face]) / a);
  const double h = (std::numbers::pi / 2.0) / spec.n;
  const auto clamp_index = [&](double angle) {
    const int i = static_cast<int>(std::floor((angle + std::numbers::pi / 4.0) / h));
    return std::clamp(i, 0, spec.n - 1);
  };
  return {face, clamp_index(alpha), clamp_index(beta)};
}

inline CellCoord locate_cell(const GridSpec& spec, const LatLon& p) {
  validate_latlon(p);
  return locate_cell_vec(spec, unit_vector(p));
}

// 4-connected neighbors in the order row-1, row+1, col-1, col+1. Crossing a
// face edge works by probing half a cell beyond it: equiangular coordinates
// agree along shared edges, and each in-face edge direction points exactly at
// the adjacent face's axis, so locate_cell resolves the probe to the unique
// geometric neighbor.
inline std::array<CellCoord, 4> face_neighbors(const GridSpec& spec, const CellCoord& c) {
  validate_cell(spec, c);
  const double h = (std::numbers::pi / 2.0) / spec.n;
  const double alpha = -std::numbers::pi / 4.0 + (c.row + 0.5) * h;
  const double beta = -std::numbers::pi / 4.0 + (c.col + 0.5) * h;
  const double beyond = std::numbers::pi / 4.0 + 0.5 * h;

  std::array<CellCoord, 4> out;
  const auto probe = [&](double a, double b) {
    return locate_cell_vec(spec, kFaceAxis[c.face] + std::tan(b) * kFaceU[c.face] +
                                     std::tan(a) * kFaceV[c.face]);
  };
  out[0] = c.row > 0 ? CellCoord{c.face, c.row - 1, c.col} : probe(-beyond, beta);
  out[1] = c.row < spec.n - 1 ? CellCoord{c.face, c.row + 1, c.col} : probe(beyond, beta);
  out[2] = c.col > 0 ? CellCoord{c.face, c.row, c.col - 1} : probe(alpha, -beyond);
  out[3] = c.col < spec.n - 1 ? CellCoord{c.face, c.row, c.col + 1} : probe(alpha, beyond);
  return out;
}

struct RegridWeights {
  GridSpec spec;
  int k = 4;
  std::vector<CellCoord> cells;  // k entries per target
  std::vector<double> weights;   // k entries per target, summing to 1

  std::size_t targets() const { return weights.size() / k; }
};

inline double great_circle_angle(Vec3 a, Vec3 b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

// Inverse-distance weights over the k nearest cell centers. A target sitting
// on a center (within 1e-12 rad) gets that center with weight 1.
inline RegridWeights knn_weights(const GridSpec& spec, const std::vector<LatLon>& targets,
                                 int k = 4) {
  require(k >= 1, "k must be at least 1");
  require(k <= spec.cells(), "k exceeds the number of grid cells");
  require(!targets.empty(), "no regrid targets given");

  std::vector<Vec3> centers(spec.cells());
  std::vector<CellCoord> coords(spec.cells());
  std::size_t idx = 0;
  for (int f = 0; f < 6; ++f)
    for (int r = 0; r < spec.n; ++r)
      for (int col = 0; col < spec.n; ++col) {
        coords[idx] = {f, r, col};
        centers[idx] = cell_center_vec(spec, coords[idx]);
        ++idx;
      }

  RegridWeights out{spec, k, {}, {}};
  out.cells.reserve(targets.size() * k);
  out.weights.reserve(targets.size() * k);

  std::vector<std::pair<double, int>> dist(centers.size());
  for (const LatLon& t : targets) {
    validate_latlon(t);
    const Vec3 tv = unit_vector(t);
    for (std::size_t i = 0; i < centers.size(); ++i)
      dist[i] = {great_circle_angle(tv, centers[i]), static_cast<int>(i)};
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + k);

    if (dist[0].first < 1e-12) {
      for (int j = 0; j < k; ++j) {
        out.cells.push_back(coords[dist[j].second]);
        out.weights.push_back(j == 0 ? 1.0 : 0.0);
      }
      continue;
    }
    double total = 0;
    for (int j = 0; j < k; ++j) total += 1.0 / dist[j].first;
    for (int j = 0; j < k; ++j) {
      out.cells.push_back(coords[dist[j].second]);
      out.weights.push_back(1.0 / dist[j].first / total);
    }
  }
  return out;
}

inline std::vector<double> apply_regrid(const RegridWeights& w, const Field& field) {
  require(w.spec == field.spec, "regrid weights were built for a different grid");
  std::vector<double> out(w.targets(), 0.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    double acc = 0;
    for (int j = 0; j < w.k; ++j) {
      const std::size_t i = t * w.k + j;
      acc += w.weights[i] * field.at(w.cells[i]);
    }
    out[t] = acc;
  }
  return out;
}

}  // namespace powercast
