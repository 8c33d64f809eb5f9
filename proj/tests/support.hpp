#pragma once

// Random instance generators shared by the unit and acceptance tests.

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "filtlab/filtration.hpp"
#include "filtlab/mmspace.hpp"
#include "filtlab/treewalk.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline filtlab::DiscreteMeasure random_measure(Rng& rng, std::size_t n, std::size_t support) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(n, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < support; ++k) total += (w[idx[k]] = u(rng));
  for (double& x : w) x /= total;
  // Push the rounding residue onto one atom so the sum is 1 to the last ulp.
  double s = 0.0;
  for (double x : w) s += x;
  w[idx[0]] += 1.0 - s;
  return filtlab::DiscreteMeasure(std::move(w));
}

// Euclidean distances between random points in the plane.
inline filtlab::SemimetricMatrix random_metric(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = u(rng);
    y[i] = u(rng);
  }
  filtlab::SemimetricMatrix d(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, std::hypot(x[i] - x[j], y[i] - y[j]));
  return d;
}

// Small integer distances: shortest paths over random integer edge weights.
inline filtlab::SemimetricMatrix random_integer_metric(Rng& rng, std::size_t n, int max_edge) {
  std::uniform_int_distribution<int> u(1, max_edge);
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = u(rng);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return filtlab::SemimetricMatrix::from_rows(d);
}

inline std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// Relabeling of a ProductModel that maps the chain to itself: a tree
// automorphism inside every top block followed by a permutation of the
// top blocks.
inline std::vector<std::size_t> chain_automorphism(const filtlab::ProductModel& m, Rng& rng) {
  std::vector<std::size_t> tree_radices(m.radices.rbegin(), m.radices.rend());
  std::size_t leaves = 1;
  for (std::size_t r : m.radices) leaves *= r;
  auto tails = random_permutation(rng, m.tail);
  std::vector<std::size_t> perm(m.size());
  for (std::size_t t = 0; t < m.tail; ++t) {
    auto a = filtlab::random_tree_automorphism(tree_radices, rng);
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) perm[t * leaves + leaf] = tails[t] * leaves + a[leaf];
  }
  return perm;
}

}  // namespace testsupport
