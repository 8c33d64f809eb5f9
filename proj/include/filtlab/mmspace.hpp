#pragma once

// Finite metric-measure spaces: semimetric matrices, discrete measures,
// partitions and decreasing partition chains.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "filtlab/errors.hpp"

namespace filtlab {

inline constexpr double kMeasureTolerance = 1e-12;

// Sum whose result depends only on the multiset of terms, not on their order.
// Used wherever relabeling invariance has to hold bit-for-bit.
double order_invariant_sum(std::vector<double> terms);

// Symmetric nonnegative matrix with zero diagonal. Construction only checks
// shape and sign; the metric invariants are checked by validate_semimetric.
class SemimetricMatrix {
 public:
  SemimetricMatrix() = default;
  explicit SemimetricMatrix(std::size_t n);
  SemimetricMatrix(std::size_t n, std::vector<double> row_major);

  static SemimetricMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static SemimetricMatrix discrete(std::size_t n);
  // d(i,j) = |i - j|
  static SemimetricMatrix line(std::size_t n);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  // Sets both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double v);

  std::span<const double> row(std::size_t i) const {
    return {d_.data() + i * n_, n_};
  }
  std::span<const double> data() const { return d_; }

  double max_entry() const;
  SemimetricMatrix scaled(double t) const;
  // Result(perm[i], perm[j]) = this(i, j).
  SemimetricMatrix relabeled(std::span<const std::size_t> perm) const;

  friend bool operator==(const SemimetricMatrix&, const SemimetricMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

struct ValidityReport {
  bool zero_diagonal = true;
  bool symmetric = true;
  bool triangle = true;
  bool triangle_checked = false;
  std::optional<std::size_t> diagonal_violation;
  std::optional<std::pair<std::size_t, std::size_t>> symmetry_violation;
  // (i, j, k) with d(i,j) > d(i,k) + d(k,j)
  std::optional<std::array<std::size_t, 3>> triangle_violation;

  bool valid() const { return zero_diagonal && symmetric && triangle; }
  std::string describe() const;
};

// The triangle pass is O(n^3); callers on hot paths skip it.
ValidityReport validate_semimetric(const SemimetricMatrix& d,
                                   bool check_triangle = true,
                                   double tolerance = 1e-12);
ValidityReport validate_semimetric(const std::vector<std::vector<double>>& rows,
                                   bool check_triangle = true,
                                   double tolerance = 1e-12);

// Nonnegative weights summing to one within kMeasureTolerance. Inputs outside
// the tolerance are rejected rather than renormalized.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<double> weights);

  static DiscreteMeasure uniform(std::size_t n);
  static DiscreteMeasure dirac(std::size_t n, std::size_t at);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> weights() const { return w_; }

  std::vector<std::size_t> support() const;
  double mass_of(std::span<const std::size_t> indices) const;
  // Entropy in bits.
  double entropy() const;
  // Result[perm[i]] = this[i].
  DiscreteMeasure relabeled(std::span<const std::size_t> perm) const;

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

 private:
  std::vector<double> w_;
};

// Binary entropy of a probability vector (zeros skipped), in bits.
double entropy_bits(std::span<const double> probabilities);

class Partition {
 public:
  Partition() = default;
  // Block ids are renumbered in order of first appearance.
  explicit Partition(std::vector<std::size_t> block_of);
  static Partition from_blocks(std::size_t size,
                               const std::vector<std::vector<std::size_t>>& blocks);
  static Partition singletons(std::size_t n);
  static Partition trivial(std::size_t n);

  std::size_t size() const { return block_of_.size(); }
  std::size_t block_count() const { return blocks_.size(); }
  std::size_t block_of(std::size_t i) const { return block_of_[i]; }
  // Sorted point indices of block b.
  std::span<const std::size_t> block(std::size_t b) const { return blocks_[b]; }
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }

  // True when every block of *this lies inside a block of coarser.
  bool refines(const Partition& coarser) const;

  std::vector<double> block_masses(const DiscreteMeasure& mu) const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.block_of_ == b.block_of_;
  }

 private:
  std::vector<std::size_t> block_of_;
  std::vector<std::vector<std::size_t>> blocks_;
};

// xi_1, ..., xi_N on a common finite space, each coarser than the previous.
// xi_0 (the partition into points) is implicit.
class PartitionChain {
 public:
  PartitionChain() = default;
  PartitionChain(std::size_t space_size, std::vector<Partition> partitions);

  std::size_t space_size() const { return space_size_; }
  std::size_t depth() const { return partitions_.size(); }
  // level k in 1..depth()
  const Partition& level(std::size_t k) const { return partitions_.at(k - 1); }
  const std::vector<Partition>& partitions() const { return partitions_; }

 private:
  std::size_t space_size_ = 0;
  std::vector<Partition> partitions_;
};

DiscreteMeasure conditional_measure(const DiscreteMeasure& mu, const Partition& xi,
                                    std::size_t block);

double partition_entropy(const DiscreteMeasure& mu, const Partition& gamma);

// H(g1|g2) + H(g2|g1), in bits.
double partition_rokhlin_distance(const DiscreteMeasure& mu, const Partition& g1,
                                  const Partition& g2);

// Common refinement g1 v g2.
Partition partition_join(const Partition& g1, const Partition& g2);

}  // namespace filtlab
