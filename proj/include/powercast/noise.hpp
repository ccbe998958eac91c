// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "powercast/error.hpp"
#include "powercast/grid.hpp"
#include "powercast/rng.hpp"

namespace powercast {

// Gradient lattice over [0,1]^3 with (F+1)^3 nodes. Directions are uniform on
// the sphere (normalized Gaussian triples); amplitudes are log-normal,
// exp(sigma_ln * z). Every node is keyed independently, so construction order
// is irrelevant.
struct GradientLattice {
  int frequency = 1;
  double sigma_ln = 0;
  std::uint64_t seed = 0;
  std::vector<Vec3> gradients;  // (F+1)^3, index (ix*(F+1)+iy)*(F+1)+iz
};

inline GradientLattice build_lattice(std::uint64_t seed, int frequency, double sigma_ln) {
  require(frequency >= 1, "lattice frequency must be at least 1");
  require(sigma_ln >= 0, "sigma_ln must be nonnegative");
  GradientLattice lat{frequency, sigma_ln, seed, {}};
  const int side = frequency + 1;
  lat.gradients.resize(static_cast<std::size_t>(side) * side * side);
  for (std::size_t node = 0; node < lat.gradients.size(); ++node) {
    Rng rng = Rng::keyed(seed, node);
    const double gx = rng.gaussian();
    const double gy = rng.gaussian();
    const double gz = rng.gaussian();
    const double n = std::sqrt(gx * gx + gy * gy + gz * gz);
    Vec3 dir = n > 1e-12 ? Vec3{gx / n, gy / n, gz / n} : Vec3{1, 0, 0};
    const double amp = std::exp(sigma_ln * rng.gaussian());
    lat.gradients[node] = amp * dir;
  }
  return lat;
}

inline double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

namespace detail {

inline int lattice_cell(double u, int frequency) {
  int i = static_cast<int>(std::floor(u));
  if (i >= frequency) i = frequency - 1;  // point exactly on the far boundary
  if (i < 0) i = 0;
  return i;
}

}  // namespace detail

// Classic gradient noise: corner dot products blended with the quintic fade.
// Opposite corners are accumulated as pairs so symmetric configurations
// cancel exactly instead of leaving round-off behind.
inline double perlin3(double x, double y, double z, const GradientLattice& lat) {
  require(x >= 0 && x <= 1 && y >= 0 && y <= 1 && z >= 0 && z <= 1,
          "noise point outside the unit cube");
  const int f = lat.frequency;
  const double ux = x * f, uy = y * f, uz = z * f;
  const int ix = detail::lattice_cell(ux, f);
  const int iy = detail::lattice_cell(uy, f);
  const int iz = detail::lattice_cell(uz, f);
  const double tx = ux - ix, ty = uy - iy, tz = uz - iz;

  const double wx1 = fade(tx), wy1 = fade(ty), wz1 = fade(tz);
  const double wx0 = 1 - wx1, wy0 = 1 - wy1, wz0 = 1 - wz1;
  const int side = f + 1;

  const auto corner = [&](int c) {
    const int dx = (c >> 2) & 1, dy = (c >> 1) & 1, dz = c & 1;
    const std::size_t node =
        (static_cast<std::size_t>(ix + dx) * side + (iy + dy)) * side + (iz + dz);
    const Vec3& g = lat.gradients[node];
    const double w = (dx ? wx1 : wx0) * (dy ? wy1 : wy0) * (dz ? wz1 : wz0);
    return w * (g.x * (tx - dx) + g.y * (ty - dy) + g.z * (tz - dz));
  };

  double s = 0;
  for (int c = 0; c < 4; ++c) s += corner(c) + corner(7 - c);
  return s;
}

struct Octave {
  int frequency = 1;
  double amplitude = 1;
};

struct FractalSpec {
  std::vector<Octave> octaves;
  double sigma_ln = 0.5;
};

inline void validate_fractal(const FractalSpec& spec) {
  require(!spec.octaves.empty(), "fractal spec needs at least one octave");
  require(spec.sigma_ln >= 0, "sigma_ln must be nonnegative");
  for (std::size_t k = 0; k < spec.octaves.size(); ++k) {
    require(spec.octaves[k].frequency >= 1, "octave frequency must be at least 1");
    require(spec.octaves[k].amplitude >= 0, "octave amplitude must be nonnegative");
    if (k > 0)
      require(spec.octaves[k].frequency > spec.octaves[k - 1].frequency,
              "octave frequencies must be strictly increasing");
  }
}

// Persistence-0.5 / lacunarity-2 ladder: amplitude halves while the frequency
// doubles at each octave.
inline FractalSpec standard_fractal(int base_frequency, int octaves, double sigma_ln = 0.5) {
  require(octaves >= 1, "need at least one octave");
  FractalSpec spec;
  spec.sigma_ln = sigma_ln;
  double amp = 1.0;
  int freq = base_frequency;
  for (int k = 0; k < octaves; ++k) {
    spec.octaves.push_back({freq, amp});
    amp *= 0.5;
    freq *= 2;
  }
  validate_fractal(spec);
  return spec;
}

// Lattices for all octaves of one fractal instance; octave k draws from the
// derived stream seed^k.
struct FractalField {
  FractalSpec spec;
  std::vector<GradientLattice> lattices;
};

inline FractalField build_fractal(const FractalSpec& spec, std::uint64_t seed) {
  validate_fractal(spec);
  FractalField field{spec, {}};
  field.lattices.reserve(spec.octaves.size());
  for (std::size_t k = 0; k < spec.octaves.size(); ++k)
    field.lattices.push_back(build_lattice(seed ^ static_cast<std::uint64_t>(k),
                                           spec.octaves[k].frequency, spec.sigma_ln));
  return field;
}

inline double fractal3(double x, double y, double z, const FractalField& field) {
  double s = 0;
  for (std::size_t k = 0; k < field.lattices.size(); ++k)
    s += field.spec.octaves[k].amplitude * perlin3(x, y, z, field.lattices[k]);
  return s;
}

// One-shot variant matching the functional signature; builds the lattices on
// the fly, so hot paths should hold a FractalField instead.
inline double fractal3(double x, double y, double z, const FractalSpec& spec,
                       std::uint64_t seed) {
  return fractal3(x, y, z, build_fractal(spec, seed));
}

// Ensemble variance of the value at a fixed point over random lattices.
// Gradients are isotropic with E[g g^T] = E[A^2]/3 * I and E[A^2] =
// exp(2 sigma_ln^2), and the 8 corner contributions are independent, so the
// variance is E[A^2]/3 * sum_c w_c^2 |d_c|^2. Exact, not an estimate.
inline double perlin3_point_variance(double x, double y, double z, int frequency,
                                     double sigma_ln) {
  require(x >= 0 && x <= 1 && y >= 0 && y <= 1 && z >= 0 && z <= 1,
          "noise point outside the unit cube");
  const double ux = x * frequency, uy = y * frequency, uz = z * frequency;
  const int ix = detail::lattice_cell(ux, frequency);
  const int iy = detail::lattice_cell(uy, frequency);
  const int iz = detail::lattice_cell(uz, frequency);
  const double tx = ux - ix, ty = uy - iy, tz = uz - iz;
  const double wx1 = fade(tx), wy1 = fade(ty), wz1 = fade(tz);
  const double wx0 = 1 - wx1, wy0 = 1 - wy1, wz0 = 1 - wz1;

  double sum = 0;
  for (int c = 0; c < 8; ++c) {
    const int dx = (c >> 2) & 1, dy = (c >> 1) & 1, dz = c & 1;
    const double w = (dx ? wx1 : wx0) * (dy ? wy1 : wy0) * (dz ? wz1 : wz0);
    const double ox = tx - dx, oy = ty - dy, oz = tz - dz;
    sum += w * w * (ox * ox + oy * oy + oz * oz);
  }
  return std::exp(2.0 * sigma_ln * sigma_ln) / 3.0 * sum;
}

inline double fractal3_point_variance(double x, double y, double z,
                                      const FractalSpec& spec) {
  validate_fractal(spec);
  double v = 0;
  for (const Octave& o : spec.octaves)
    v += o.amplitude * o.amplitude *
         perlin3_point_variance(x, y, z, o.frequency, spec.sigma_ln);
  return v;
}

// Cell center -> cube point for sphere sampling: the unit vector is shifted
// into [0,1]^3. Components can leave the cube by a rounding ulp, hence the
// clamp.
inline void sphere_cube_point(Vec3 v, double& x, double& y, double& z) {
  const auto half = [](double c) {
    double t = 0.5 * (c + 1.0);
    if (t < 0) t = 0;
    if (t > 1) t = 1;
    return t;
  };
  x = half(v.x);
  y = half(v.y);
  z = half(v.z);
}

// Evaluates the fractal noise at every cell center of the grid. The cube is
// sampled along the embedded sphere, so faces meet without seams.
inline Field sample_sphere(const GridSpec& grid, const FractalSpec& spec,
                           std::uint64_t seed) {
  const FractalField field = build_fractal(spec, seed);
  Field out(grid);
  std::size_t idx = 0;
  for (int f = 0; f < 6; ++f)
    for (int r = 0; r < grid.n; ++r)
      for (int c = 0; c < grid.n; ++c) {
        double x, y, z;
        sphere_cube_point(cell_center_vec(grid, {f, r, c}), x, y, z);
        out.v[idx++] = fractal3(x, y, z, field);
      }
  return out;
}

}  // namespace powercast
