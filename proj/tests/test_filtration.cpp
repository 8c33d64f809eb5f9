#include <cmath>

#include "doctest.h"
#include "filtlab/filtration.hpp"
#include "filtlab/treewalk.hpp"
#include "support.hpp"

using namespace filtlab;

using testsupport::chain_automorphism;

TEST_SUITE("filtration") {

TEST_CASE("iterate_semimetric examples") {
  auto mu = DiscreteMeasure::uniform(4);
  auto xi = Partition::from_blocks(4, {{0, 1}, {2, 3}});
  PartitionChain chain(4, {xi});
  auto rho0 = SemimetricMatrix::discrete(4);
  auto levels = iterate_semimetric(rho0, mu, chain, 1);
  REQUIRE(levels.size() == 1);
  const auto& r1 = levels[0];
  CHECK(r1(0, 1) == 0.0);
  CHECK(r1(2, 3) == 0.0);
  CHECK(r1(0, 2) == 1.0);
  CHECK(r1(1, 3) == 1.0);
  CHECK(mean_distance(rho0, mu) == 0.75);
  CHECK(mean_distance(r1, mu) == 0.5);
  CHECK(mean_distance(r1.expand(), mu) == 0.5);
  CHECK(mean_distance(SemimetricMatrix(4), mu) == 0.0);

  // Singleton partitions at every level reproduce rho_0.
  testsupport::Rng rng(41);
  auto d = testsupport::random_metric(rng, 5);
  auto nu = testsupport::random_measure(rng, 5, 5);
  PartitionChain points(5, {Partition::singletons(5), Partition::singletons(5)});
  for (const auto& level : iterate_semimetric(d, nu, points, 2)) CHECK(level.expand() == d);
  auto prof = standardness_profile(d, nu, points);
  CHECK(prof.c[0] == prof.c[2]);
  CHECK_FALSE(prof.strictly_decreasing);
}

TEST_CASE("levels vanish on blocks and stay semimetrics") {
  testsupport::Rng rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    ProductModel m{{2, 3, 2}, 2};
    auto d = testsupport::random_metric(rng, m.size());
    auto mu = testsupport::random_measure(rng, m.size(), m.size());
    auto chain = m.chain();
    auto levels = iterate_semimetric(d, mu, chain, 3);
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto full = levels[k - 1].expand();
      CHECK(validate_semimetric(full, true, 1e-9).valid());
      for (std::size_t x = 0; x < m.size(); ++x)
        for (std::size_t y = 0; y < m.size(); ++y)
          if (chain.level(k).block_of(x) == chain.level(k).block_of(y)) CHECK(full(x, y) == 0.0);
    }
    auto prof = standardness_profile(d, mu, chain);
    for (std::size_t k = 1; k < prof.c.size(); ++k) CHECK(prof.c[k] <= prof.c[k - 1] + 1e-9);
  }
}

TEST_CASE("null blocks are skipped and direct queries fail") {
  std::vector<double> w = {0.5, 0.5, 0.0, 0.0};
  auto xi = Partition::from_blocks(4, {{0, 1}, {2, 3}});
  PartitionChain chain(4, {xi, Partition::trivial(4)});
  auto levels = iterate_semimetric(SemimetricMatrix::line(4), DiscreteMeasure(w), chain, 2);
  CHECK(levels[0](0, 1) == 0.0);
  CHECK_THROWS_AS(levels[0](0, 2), DegenerateBlockError);
  CHECK(levels[1](0, 3) == 0.0);
  CHECK(mean_distance(levels[0], DiscreteMeasure(w)) == 0.0);
}

TEST_CASE("dyadic Bernoulli model") {
  auto m = dyadic_bernoulli_model(7);
  CHECK(m.size() == 128);
  auto mu = m.uniform_measure();
  auto chain = m.chain();
  // Hamming over all 7 bits: each level forgets one bit's worth of distance.
  auto prof = standardness_profile(m.cylinder_hamming(7), mu, chain);
  REQUIRE(prof.c.size() == 7);
  for (std::size_t n = 0; n <= 6; ++n)
    CHECK(prof.c[n] == doctest::Approx((7.0 - n) / 14.0).epsilon(1e-14));
  CHECK(prof.strictly_decreasing);
  CHECK(prof.terminal_ratio < 0.2);
  // A semimetric that only sees bit 0 dies after the first step.
  auto first = standardness_profile(m.cylinder_hamming(1), mu, chain);
  CHECK(first.c[0] == 0.5);
  CHECK(first.c[1] == 0.0);
}

TEST_CASE("agreement with the tree distance") {
  testsupport::Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t r = (trial % 3 == 2) ? 3 : 2;
    const std::size_t n = (r == 2) ? 3 : 2;
    ProductModel m{std::vector<std::size_t>(n, r), 4};
    const std::size_t leaves = m.size() / m.tail;
    auto base_matrix = testsupport::random_integer_metric(rng, 3, 5).scaled(0.25);
    auto base = LabelMetric::matrix(base_matrix);
    std::vector<std::uint64_t> label(m.size());
    for (auto& l : label) l = rng() % 3;
    SemimetricMatrix rho0(m.size());
    for (std::size_t x = 0; x < m.size(); ++x)
      for (std::size_t y = x + 1; y < m.size(); ++y) rho0.set(x, y, base_matrix(label[x], label[y]));
    auto levels = iterate_semimetric(rho0, m.uniform_measure(), m.chain(), n);
    for (std::size_t a = 0; a < m.tail; ++a) {
      for (std::size_t b = 0; b < m.tail; ++b) {
        TreeLeafSystem ta{m.radices, {label.begin() + a * leaves, label.begin() + (a + 1) * leaves}, base};
        TreeLeafSystem tb{m.radices, {label.begin() + b * leaves, label.begin() + (b + 1) * leaves}, base};
        const double via_transport = levels.back()(a * leaves, b * leaves);
        if (r == 2)
          CHECK(via_transport == tree_distance(ta, tb));
        else
          CHECK(via_transport == doctest::Approx(tree_distance(ta, tb)).epsilon(1e-12));
        CHECK(via_transport <= identity_matching_distance(ta, tb) + 1e-12);
      }
    }
  }
}

TEST_CASE("relabeling invariance") {
  testsupport::Rng rng(44);
  for (int trial = 0; trial < 25; ++trial) {
    ProductModel m{{2, 3, 2}, 3};
    auto d = testsupport::random_metric(rng, m.size());
    auto mu = m.uniform_measure();
    auto chain = m.chain();
    auto perm = chain_automorphism(m, rng);
    auto base = iterate_semimetric(d, mu, chain, 3);
    auto moved = iterate_semimetric(d.relabeled(perm), mu, chain, 3);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(moved[k].expand() == base[k].expand().relabeled(perm));
    CHECK(standardness_profile(d, mu, chain).c ==
          standardness_profile(d.relabeled(perm), mu, chain).c);
  }
}

TEST_CASE("worker count does not change results") {
  testsupport::Rng rng(45);
  auto m = ProductModel{{2, 2, 2}, 8};
  auto d = testsupport::random_metric(rng, m.size());
  auto mu = testsupport::random_measure(rng, m.size(), m.size());
  auto one = iterate_semimetric(d, mu, m.chain(), 3, 1);
  auto four = iterate_semimetric(d, mu, m.chain(), 3, 4);
  for (std::size_t k = 0; k < 3; ++k) CHECK(one[k].quotient() == four[k].quotient());
}

}
