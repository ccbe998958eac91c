// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "powercast/metrics.hpp"
#include "powercast/rng.hpp"
#include "oracles.hpp"

using namespace powercast;

namespace {

struct Instance {
  std::vector<double> scores;
  std::vector<uint8_t> labels;
};

// Random scored sample with deliberate ties: scores snap to a coarse lattice
// with probability 1/2. Guarantees both classes appear.
Instance random_instance(uint64_t seed, int n) {
  Rng rng = Rng::keyed(seed, 13, 0, 0);
  Instance inst;
  inst.scores.resize(n);
  inst.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = rng.uniform();
    if (rng.uniform() < 0.5) s = std::floor(s * 8.0) / 8.0;
    inst.scores[i] = s;
    inst.labels[i] = rng.uniform() < 0.3 ? 1 : 0;
  }
  inst.labels[0] = 0;
  inst.labels[n - 1] = 1;
  return inst;
}

}  // namespace

TEST_CASE("auc on a worked example", "[metrics]") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<uint8_t> y{0, 0, 1, 1};
  REQUIRE(auc(s, y) == 0.75);
}

TEST_CASE("auc extremes and full ties", "[metrics]") {
  REQUIRE(auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
  REQUIRE(auc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}) == 0.0);
  REQUIRE(auc({0.5, 0.5}, {0, 1}) == 0.5);
  REQUIRE(auc(std::vector<double>(20, 0.3),
              {0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1}) ==
          0.5);
}

TEST_CASE("auc matches the pairwise rank statistic", "[metrics]") {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng = Rng::keyed(seed, 17, 0, 0);
    const int n = 2 + static_cast<int>(rng.uniform() * 120);
    const Instance inst = random_instance(seed, n);
    const double fast = auc(inst.scores, inst.labels);
    const std::vector<int> wide(inst.labels.begin(), inst.labels.end());
    const double slow = oracles::mw_auc_oracle(inst.scores, wide);
    REQUIRE_THAT(fast, Catch::Matchers::WithinAbs(slow, 1e-12));
  }
}

TEST_CASE("auc is invariant under order-preserving score maps", "[metrics]") {
  const Instance inst = random_instance(5, 80);
  std::vector<double> warped(inst.scores.size());
  for (std::size_t i = 0; i < warped.size(); ++i)
    warped[i] = std::exp(3.0 * inst.scores[i]) - 1.0;
  REQUIRE(auc(warped, inst.labels) == auc(inst.scores, inst.labels));
}

TEST_CASE("flipping labels mirrors the area", "[metrics]") {
  const Instance inst = random_instance(6, 90);
  std::vector<uint8_t> flipped(inst.labels.size());
  for (std::size_t i = 0; i < flipped.size(); ++i)
    flipped[i] = 1 - inst.labels[i];
  REQUIRE_THAT(auc(inst.scores, flipped),
               Catch::Matchers::WithinAbs(1.0 - auc(inst.scores, inst.labels),
                                          1e-12));
}

TEST_CASE("auc is permutation invariant", "[metrics]") {
  Instance inst = random_instance(7, 64);
  const double base = auc(inst.scores, inst.labels);
  std::vector<uint32_t> perm(inst.scores.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<uint32_t>(i);
  Rng rng = Rng::keyed(7, 19, 0, 0);
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform() * i)]);
  std::vector<double> ps(perm.size());
  std::vector<uint8_t> pl(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    ps[i] = inst.scores[perm[i]];
    pl[i] = inst.labels[perm[i]];
  }
  REQUIRE(auc(ps, pl) == base);
}

TEST_CASE("roc curve shape", "[metrics]") {
  const Instance inst = random_instance(9, 200);
  const auto curve = roc_curve(inst.scores, inst.labels);
  REQUIRE(curve.front().fpr == 0.0);
  REQUIRE(curve.front().tpr == 0.0);
  REQUIRE(std::isinf(curve.front().threshold));
  REQUIRE(curve.back().fpr == 1.0);
  REQUIRE(curve.back().tpr == 1.0);
  for (std::size_t k = 1; k < curve.size(); ++k) {
    REQUIRE(curve[k].fpr >= curve[k - 1].fpr);
    REQUIRE(curve[k].tpr >= curve[k - 1].tpr);
    REQUIRE(curve[k].threshold < curve[k - 1].threshold);
  }
}

TEST_CASE("trapezoid area equals the rank form", "[metrics]") {
  for (uint64_t seed = 20; seed < 40; ++seed) {
    const Instance inst = random_instance(seed, 150);
    REQUIRE_THAT(trapezoid_auc(roc_curve(inst.scores, inst.labels)),
                 Catch::Matchers::WithinAbs(auc(inst.scores, inst.labels),
                                            1e-12));
  }
}

TEST_CASE("crps of a point forecast is absolute error", "[metrics]") {
  REQUIRE(crps_ensemble({2.0}, 1.0) == 1.0);
  REQUIRE(crps_ensemble({-3.5}, 1.5) == 5.0);
}

TEST_CASE("crps worked example", "[metrics]") {
  // mean dev = 1, mean pairwise gap = 2·2/4 = 1, so 1 - 1/2.
  REQUIRE_THAT(crps_ensemble({0.0, 2.0}, 1.0),
               Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("crps equals the integral of the squared cdf gap", "[metrics]") {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = Rng::keyed(seed, 23, 0, 0);
    const int n = 1 + static_cast<int>(rng.uniform() * 40);
    std::vector<double> members(n);
    for (double& m : members) {
      m = 4.0 * rng.uniform() - 2.0;
      if (rng.uniform() < 0.3) m = std::floor(m * 2.0) / 2.0;  // duplicates
    }
    const double truth = 6.0 * rng.uniform() - 3.0;
    REQUIRE_THAT(crps_ensemble(members, truth),
                 Catch::Matchers::WithinAbs(
                     oracles::crps_integral_oracle(members, truth), 1e-12));
  }
}

TEST_CASE("crps shift and scale behavior", "[metrics]") {
  const std::vector<double> m{0.3, -1.2, 0.7, 2.4, 0.3};
  const double base = crps_ensemble(m, 0.4);
  std::vector<double> shifted(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) shifted[i] = m[i] + 10.25;
  REQUIRE_THAT(crps_ensemble(shifted, 10.65),
               Catch::Matchers::WithinAbs(base, 1e-12));
  std::vector<double> scaled(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) scaled[i] = m[i] * 3.0;
  REQUIRE_THAT(crps_ensemble(scaled, 1.2),
               Catch::Matchers::WithinAbs(3.0 * base, 1e-12));
}

TEST_CASE("crps vanishes only on exact hits", "[metrics]") {
  REQUIRE(crps_ensemble({1.5, 1.5, 1.5}, 1.5) == 0.0);
  REQUIRE(crps_ensemble({1.5, 1.6}, 1.5) > 0.0);
}

TEST_CASE("rmse basics", "[metrics]") {
  REQUIRE_THAT(rmse({0.0, 0.0}, {3.0, 4.0}),
               Catch::Matchers::WithinAbs(3.53553390593273762, 1e-14));
  const std::vector<double> a{1.0, -2.0, 0.5};
  REQUIRE(rmse(a, a) == 0.0);
}

TEST_CASE("metrics input validation", "[metrics]") {
  REQUIRE_THROWS_AS(auc({}, {}), ValidationError);
  REQUIRE_THROWS_AS(auc({0.5}, {0, 1}), ValidationError);
  REQUIRE_THROWS_AS(auc({0.5, 0.6}, {0, 2}), ValidationError);
  REQUIRE_THROWS_AS(auc({0.5, std::nan("")}, {0, 1}), ValidationError);
  REQUIRE_THROWS_AS(auc({0.5, 0.6}, {0, 0}), DegenerateLabelsError);
  REQUIRE_THROWS_AS(auc({0.5, 0.6}, {1, 1}), DegenerateLabelsError);
  REQUIRE_THROWS_AS(roc_curve({0.5, 0.6}, {1, 1}), DegenerateLabelsError);
  REQUIRE_THROWS_AS(crps_ensemble({}, 0.0), ValidationError);
  REQUIRE_THROWS_AS(crps_ensemble({0.0}, std::nan("")), ValidationError);
  REQUIRE_THROWS_AS(rmse({1.0}, {1.0, 2.0}), ValidationError);
  REQUIRE_THROWS_AS(rmse({}, {}), ValidationError);
}
