#include <cmath>

#include "doctest.h"
#include "filtlab/treewalk.hpp"
#include "support.hpp"

using namespace filtlab;

namespace {

TreeLeafSystem sys(std::size_t r, std::size_t n, std::vector<std::uint64_t> labels,
                   const LabelMetric& base) {
  return TreeLeafSystem::homogeneous(r, n, std::move(labels), base);
}

TreeLeafSystem random_system(testsupport::Rng& rng, const std::vector<std::size_t>& radices,
                             const LabelMetric& base) {
  TreeLeafSystem t{radices, {}, base};
  t.labels.resize(t.leaf_count());
  for (auto& l : t.labels) l = rng() % base.alphabet_size();
  return t;
}

// Dyadic distances so every leaf sum is exact in binary floating point.
LabelMetric dyadic_metric(testsupport::Rng& rng, std::size_t k) {
  auto d = testsupport::random_integer_metric(rng, k, 7);
  return LabelMetric::matrix(d.scaled(0.125));
}

}  // namespace

TEST_SUITE("treewalk") {

TEST_CASE("tree_distance examples") {
  auto disc = LabelMetric::matrix(SemimetricMatrix::discrete(2));
  CHECK(tree_distance(sys(2, 0, {0}, disc), sys(2, 0, {1}, disc)) == 1.0);
  CHECK(tree_distance(sys(2, 1, {0, 1}, disc), sys(2, 1, {1, 0}, disc)) == 0.0);
  CHECK(tree_distance(sys(2, 1, {0, 0}, disc), sys(2, 1, {0, 1}, disc)) == 0.5);
  CHECK_THROWS_AS(tree_distance(sys(2, 1, {0, 0}, disc), sys(2, 0, {0}, disc)), StructuralError);
  CHECK_THROWS_AS(sys(2, 1, {0}, disc), StructuralError);
  CHECK_THROWS_AS(sys(2, 1, {0, 2}, disc), StructuralError);
}

TEST_CASE("hamming labels") {
  auto h = LabelMetric::hamming(3);
  CHECK(h(0b101, 0b011) == doctest::Approx(2.0 / 3.0));
  CHECK(h.alphabet_size() == 8);
}

TEST_CASE("brute force: all binary r=2, n<=2 pairs") {
  auto disc = LabelMetric::matrix(SemimetricMatrix::discrete(2));
  CHECK(all_tree_automorphisms({2, 2}).size() == 8);
  for (std::size_t n = 0; n <= 2; ++n) {
    const std::size_t leaves = std::size_t{1} << n;
    for (std::uint64_t a = 0; a < (1u << leaves); ++a) {
      for (std::uint64_t b = 0; b < (1u << leaves); ++b) {
        auto x = sys(2, n, word_labels(a, 2, leaves), disc);
        auto y = sys(2, n, word_labels(b, 2, leaves), disc);
        CHECK(tree_distance(x, y) == tree_distance_bruteforce(x, y));
      }
    }
    auto x = sys(2, n, std::vector<std::uint64_t>(leaves, 1), disc);
    CHECK(tree_distance_bruteforce(x, x) == 0.0);
  }
}

TEST_CASE("brute force: random shapes with dyadic bases") {
  testsupport::Rng rng(31);
  const std::vector<std::vector<std::size_t>> shapes = {
      {3}, {2, 2, 2}, {2, 2, 2, 2}, {3, 2}, {2, 3}, {4, 2}, {2, 4}, {4}, {5}, {3, 3}};
  CHECK(all_tree_automorphisms({3}).size() == 6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto& shape = shapes[trial % shapes.size()];
    auto base = dyadic_metric(rng, 2 + rng() % 4);
    auto x = random_system(rng, shape, base);
    auto y = random_system(rng, shape, base);
    CHECK(tree_distance(x, y) == tree_distance_bruteforce(x, y));
  }
  auto big = TreeLeafSystem{{2, 2, 2, 2, 2}, std::vector<std::uint64_t>(32, 0),
                            LabelMetric::hamming(1)};
  CHECK_THROWS_AS(tree_distance_bruteforce(big, big), SizeError);
}

TEST_CASE("semimetric properties, automorphism invariance, trivial-group bound") {
  testsupport::Rng rng(32);
  const std::vector<std::vector<std::size_t>> shapes = {
      {2, 2, 2, 2, 2}, {3, 3, 3}, {4, 4}, {2, 3, 4}, {6, 2}};
  for (int trial = 0; trial < 150; ++trial) {
    const auto& shape = shapes[trial % shapes.size()];
    auto base = (trial % 3 == 0) ? LabelMetric::hamming(3)
                                 : LabelMetric::matrix(testsupport::random_metric(rng, 4));
    auto x = random_system(rng, shape, base);
    auto y = random_system(rng, shape, base);
    auto z = random_system(rng, shape, base);
    const double xy = tree_distance(x, y);
    CHECK(xy == tree_distance(y, x));
    CHECK(tree_distance(x, x) == 0.0);
    CHECK(xy <= tree_distance(x, z) + tree_distance(z, y) + 1e-9);
    CHECK(xy <= identity_matching_distance(x, y) + 1e-12);
    auto gx = permute_leaves(x, random_tree_automorphism(shape, rng));
    auto gy = permute_leaves(y, random_tree_automorphism(shape, rng));
    CHECK(tree_distance(gx, gy) == xy);
    CHECK(tree_distance(gx, x) == 0.0);
  }
}

TEST_CASE("orbit_partition examples") {
  auto fair = iid_word_measure({0.5, 0.5}, 2);
  auto g1 = orbit_partition(1, 2, 2, fair);
  CHECK(g1.orbit_count == 3);
  CHECK(g1.entropy == doctest::Approx(1.5).epsilon(1e-15));
  // Words 01 and 10 (indices 2 and 1) share an orbit.
  CHECK(g1.gamma.block_of(1) == g1.gamma.block_of(2));

  auto g0 = orbit_partition(2, 2, 1, DiscreteMeasure::uniform(1));
  CHECK(g0.orbit_count == 1);
  CHECK(g0.entropy == 0.0);

  // n=2: count orbits directly through the 8 automorphisms.
  auto autos = all_tree_automorphisms({2, 2});
  std::vector<int> orbit_of(16, -1);
  int orbits = 0;
  std::vector<double> mass;
  for (std::uint64_t w = 0; w < 16; ++w) {
    if (orbit_of[w] >= 0) continue;
    auto labels = word_labels(w, 2, 4);
    mass.push_back(0.0);
    for (const auto& a : autos) {
      std::uint64_t image = 0;
      std::vector<std::uint64_t> moved(4);
      for (std::size_t i = 0; i < 4; ++i) moved[a[i]] = labels[i];
      for (std::size_t i = 4; i-- > 0;) image = image * 2 + moved[i];
      if (orbit_of[image] < 0) {
        orbit_of[image] = orbits;
        mass.back() += 1.0 / 16.0;
      }
    }
    ++orbits;
  }
  auto g2 = orbit_partition(2, 2, 2, iid_word_measure({0.5, 0.5}, 4));
  CHECK(g2.orbit_count == static_cast<std::size_t>(orbits));
  CHECK(g2.orbit_count == 6);
  CHECK(g2.entropy == doctest::Approx(entropy_bits(mass)).epsilon(1e-14));
  for (std::uint64_t w = 0; w < 16; ++w)
    for (std::uint64_t v = 0; v < 16; ++v)
      CHECK((g2.gamma.block_of(w) == g2.gamma.block_of(v)) == (orbit_of[w] == orbit_of[v]));

  CHECK_THROWS_AS(orbit_partition(3, 2, 8, DiscreteMeasure::uniform(1)), SizeError);
}

TEST_CASE("exponential_entropy_estimate") {
  auto e = exponential_entropy_estimate({1.5}, {2});
  CHECK(e.h[0] == 0.75);
  auto z = exponential_entropy_estimate({0, 0, 0}, {2, 2, 2});
  CHECK(z.estimate == 0.0);
  CHECK(z.nonincreasing);
  // Real orbit entropies for fair bits, n = 1..4.
  std::vector<double> hs;
  for (std::size_t n = 1; n <= 4; ++n)
    hs.push_back(orbit_partition(n, 2, 2, iid_word_measure({0.5, 0.5}, std::size_t{1} << n)).entropy);
  auto profile = exponential_entropy_estimate(hs, {2, 2, 2, 2});
  CHECK(profile.nonincreasing);
  CHECK(exponential_entropy_estimate({1.0, 3.0}, {2, 2}).nonincreasing == false);
}

TEST_CASE("continuity in the letter partition") {
  // Coarsening letters through an alphabet partition gamma; the per-leaf
  // normalized orbit entropy moves by at most the Rokhlin distance.
  testsupport::Rng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 3 + rng() % 2;
    auto p = testsupport::random_measure(rng, k, k);
    std::vector<double> law(p.weights().begin(), p.weights().end());
    auto random_letter_partition = [&] {
      std::vector<std::size_t> l(k);
      for (auto& x : l) x = rng() % 3;
      return Partition(l);
    };
    auto ga = random_letter_partition();
    auto gb = random_letter_partition();
    const double bound = partition_rokhlin_distance(p, ga, gb);
    for (std::size_t n = 1; n <= 3; ++n) {
      const std::size_t leaves = std::size_t{1} << n;
      auto h_of = [&](const Partition& g) {
        auto coarse = g.block_masses(p);
        return orbit_partition(n, 2, coarse.size(), iid_word_measure(coarse, leaves)).entropy /
               static_cast<double>(leaves);
      };
      CHECK(std::fabs(h_of(ga) - h_of(gb)) <= bound + 1e-9);
    }
  }
}

}
