// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace powercast {

// splitmix64 finalizer. Bijective with strong avalanche, which is what lets
// nearby keys (seed, seed^1, ...) behave as unrelated streams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a stream key from a seed plus up to three indices (node id, day,
// packed member id, ...). Chained finalizers keep distinct index tuples on
// distinct streams without any sequential draw order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a = 0,
                                    std::uint64_t b = 0, std::uint64_t c = 0) noexcept {
  return mix64(mix64(mix64(mix64(seed) + a) + b) + c);
}

// Counter-based generator: every output is a pure function of (key, counter),
// so results do not depend on evaluation order or thread placement. The body
// is splitmix64 with the derived key as initial state.
class Rng {
 public:
  static Rng keyed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                   std::uint64_t c = 0) noexcept {
    Rng r;
    r.state_ = derive_seed(seed, a, b, c);
    return r;
  }

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0, 1); never returns an exact endpoint.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double gaussian() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace powercast
