#include <cmath>

#include "doctest.h"
#include "filtlab/walksim.hpp"
#include "support.hpp"

using namespace filtlab;

TEST_SUITE("walksim") {

TEST_CASE("leaf observations unroll the walk") {
  auto z1 = GroupSpec::lattice(1);
  auto p = WalkPoint::sampled(z1, 17, 3);
  auto t = leaf_observations(p, z1, 1);
  REQUIRE(t.labels.size() == 2);
  // Symbol 0 steps to +1, symbol 1 to -1.
  CHECK(t.labels[0] == static_cast<std::uint64_t>(p.scenery.bit({z1, {1}})));
  CHECK(t.labels[1] == static_cast<std::uint64_t>(p.scenery.bit({z1, {-1}})));
  CHECK(t.base == LabelMetric::hamming(1));

  auto q = WalkPoint::sampled(z1, 17, 3);
  CHECK(pair_distance(p, q, z1, 4) == 0.0);

  WalkPoint flat{Scenery::constant_zero(), identity(z1), 3};
  auto tf = leaf_observations(flat, z1, 3);
  for (auto l : tf.labels) CHECK(l == 0);
  WalkPoint flat2{Scenery::constant_zero(), {z1, {5}}, 3};
  CHECK(pair_distance(flat, flat2, z1, 3) == 0.0);

  CHECK_THROWS_AS(leaf_observations(p, GroupSpec::free_group(2), 8), SizeError);
  CHECK_THROWS_AS(leaf_observations(p, GroupSpec::free_group(2), 2), StructuralError);
}

TEST_CASE("fast path equals tree distance of the leaf systems") {
  testsupport::Rng rng(61);
  struct Case {
    GroupSpec spec;
    std::size_t n, m;
  };
  const std::vector<Case> cases = {
      {GroupSpec::lattice(1), 5, 5}, {GroupSpec::lattice(1), 6, 3}, {GroupSpec::lattice(2), 4, 4},
      {GroupSpec::lattice(2), 4, 2}, {GroupSpec::free_group(2), 4, 4}, {GroupSpec::free_group(2), 3, 8},
      {GroupSpec::heisenberg(), 4, 4}, {GroupSpec::lattice(1), 7, 4}, {GroupSpec::free_group(1), 6, 6}};
  for (const auto& c : cases) {
    for (int trial = 0; trial < 6; ++trial) {
      auto p = WalkPoint::sampled(c.spec, rng(), c.m);
      auto q = WalkPoint::sampled(c.spec, rng(), c.m);
      const double fast = pair_distance(p, q, c.spec, c.n);
      const auto tp = leaf_observations(p, c.spec, c.n);
      const auto tq = leaf_observations(q, c.spec, c.n);
      CHECK(fast == tree_distance(tp, tq));
      CHECK(fast == pair_distance(q, p, c.spec, c.n));
      CHECK(fast <= identity_matching_distance(tp, tq));
    }
  }
}

TEST_CASE("engine matrix matches single pairs and ignores the worker count") {
  auto f2 = GroupSpec::free_group(2);
  auto pts = sample_points(f2, 12, 5, 99);
  WalkDistanceEngine one(f2, 5, pts, 1);
  WalkDistanceEngine three(f2, 5, pts, 3);
  auto m1 = one.matrix();
  CHECK(m1 == three.matrix());
  CHECK(m1(2, 7) == pair_distance(pts[2], pts[7], f2, 5));
  CHECK(validate_semimetric(m1, true, 1e-12).valid());
}

TEST_CASE("left invariance") {
  testsupport::Rng rng(62);
  for (auto spec : {GroupSpec::lattice(2), GroupSpec::heisenberg(), GroupSpec::free_group(2)}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<std::uint32_t> hw(7), gw(5);
      for (auto& s : hw) s = static_cast<std::uint32_t>(rng() % spec.alphabet_size());
      for (auto& s : gw) s = static_cast<std::uint32_t>(rng() % spec.alphabet_size());
      auto h = apply_word(identity(spec), hw);
      auto g = apply_word(identity(spec), gw);
      WalkPoint p{Scenery(rng()), g, 4};
      WalkPoint q{Scenery(rng()), g, 4};
      WalkPoint hp{p.scenery.translated(h), multiply(h, g), 4};
      WalkPoint hq{q.scenery.translated(h), multiply(h, g), 4};
      CHECK(pair_distance(p, q, spec, 4) == pair_distance(hp, hq, spec, 4));
      CHECK(leaf_observations(p, spec, 3).labels == leaf_observations(hp, spec, 3).labels);
    }
  }
}

TEST_CASE("Monte Carlo mean on Z1 sits between zero and the trivial-group bound") {
  auto z1 = GroupSpec::lattice(1);
  auto rows = mean_distance_profile(z1, 6, 6, 200, 2024);
  REQUIRE(rows.size() == 6);
  const auto& last = rows.back();
  CHECK(last.c.value > 0.0);
  CHECK(last.c.value < last.identity_matching.value);
  for (std::size_t k = 1; k < rows.size(); ++k)
    CHECK(rows[k].c.ci_low <= rows[k - 1].c.ci_high);
  auto again = mean_distance_profile(z1, 3, 6, 50, 2024, 1);
  auto threaded = mean_distance_profile(z1, 3, 6, 50, 2024, 4);
  for (std::size_t k = 0; k < again.size(); ++k) CHECK(again[k].c.value == threaded[k].c.value);
}

TEST_CASE("ball measure") {
  auto f2 = GroupSpec::free_group(2);
  auto p = WalkPoint::sampled(f2, 5, 4);
  CHECK(ball_measure_estimate(p, f2, 3, 1.5, 100, 7).value == 1.0);
  auto zero = ball_measure_estimate(p, f2, 4, 0.0, 100, 7);
  CHECK(zero.value == 0.0);
  CHECK(zero.ci_low == 0.0);
  CHECK(zero.ci_high > 0.0);
  auto sweep = ball_measure_sweep(p, f2, {4}, {0.05, 0.1, 0.2, 0.3, 0.5}, 150, 8);
  for (std::size_t e = 1; e < sweep[0].size(); ++e) CHECK(sweep[0][e].value >= sweep[0][e - 1].value);
  for (const auto& est : sweep[0]) {
    CHECK(est.ci_low <= est.value);
    CHECK(est.value <= est.ci_high);
  }
  CHECK_THROWS_AS(ball_measure_estimate(p, f2, 3, 0.2, 50, 7), DomainError);
}

}
