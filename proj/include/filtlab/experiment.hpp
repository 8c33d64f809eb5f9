#pragma once

// Pipelines shared by the CLI and the acceptance suite: walk H-tables,
// orbit-entropy tables and the dyadic standardness profile.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "filtlab/entropy.hpp"
#include "filtlab/groups.hpp"
#include "filtlab/mmspace.hpp"

namespace filtlab {

struct HTableCell {
  std::size_t n = 0;
  double epsilon = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string method;
};

struct EntropyTable {
  std::vector<HTableCell> cells;  // n-major, eps in the given order

  // Upper (or lower) bounds arranged for scaled_entropy_eval and friends.
  HTable upper_table() const;
  HTable lower_table() const;
  // H at a fixed eps across n.
  std::vector<double> upper_at(double epsilon) const;
  std::vector<std::size_t> ns() const;
};

// Provides the distance matrix of the sampled points at depth n; lets the
// caller put a cache in front of the walk engine.
using MatrixSource = std::function<SemimetricMatrix(std::size_t n)>;

struct WalkSample {
  GroupSpec group;
  std::size_t m = 1;
  std::size_t points = 100;  // K
  std::uint64_t seed = 0;
  std::uint64_t leaf_cap = 1 << 14;
};

// Distances among the K points sample_points(group, K, m, seed) at depth n.
SemimetricMatrix walk_distance_matrix(const WalkSample& s, std::size_t n, unsigned threads);

// H_eps(rho_n) bounds for the uniform measure on the sampled points, one
// matrix per n. Cells are evaluated in parallel; output is deterministic.
EntropyTable walk_entropy_table(const std::vector<std::size_t>& ns,
                                const std::vector<double>& epsilons, const MatrixSource& source,
                                unsigned threads, const EntropyOptions& opt = {});

struct OrbitEntropyRow {
  std::size_t n = 0;
  std::size_t orbit_count = 0;
  double orbit_entropy = 0.0;  // H(gamma_n), bits
  double h = 0.0;              // H(gamma_n) / r^n
};

struct OrbitEntropyResult {
  std::vector<OrbitEntropyRow> rows;
  bool nonincreasing = true;
  EntropyTable table;  // H_eps of the orbit space under rho_n, i.i.d. letters
};

// Height-n trees with valence r and k-letter leaves, n = 1..n_max. The
// metric space at depth n is the word space with the normalized Hamming
// base metric lifted by tree_distance; orbits are at distance zero, so it
// is evaluated on orbit representatives with orbit masses.
OrbitEntropyResult orbit_entropy_experiment(std::size_t n_max, std::size_t r,
                                            const std::vector<double>& letter_law,
                                            const std::vector<double>& epsilons, unsigned threads);

}  // namespace filtlab
