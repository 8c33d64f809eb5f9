#pragma once

// Iterated Kantorovich semimetrics over a finite partition chain.
//
// rho_k lives on the quotient X / xi_k: one row per xi_k-block. The
// conditional measure of a xi_k-block is taken over its xi_{k-1}-sub-blocks
// (tower property), so level k only ever reads level k-1.

#include <cstddef>
#include <vector>

#include "filtlab/mmspace.hpp"

namespace filtlab {

class SemimetricLevel {
 public:
  SemimetricLevel() = default;
  SemimetricLevel(SemimetricMatrix quotient, std::vector<std::size_t> block_of,
                  std::vector<char> null_block);

  // Distance between points x and y of X. Throws DegenerateBlockError when
  // either point sits in a null block.
  double operator()(std::size_t x, std::size_t y) const;

  const SemimetricMatrix& quotient() const { return quotient_; }
  std::size_t block_of(std::size_t x) const { return block_of_[x]; }
  bool is_null(std::size_t block) const { return null_block_[block] != 0; }
  std::size_t space_size() const { return block_of_.size(); }

  // Full |X| x |X| matrix; null blocks are expanded as distance 0.
  SemimetricMatrix expand() const;

 private:
  SemimetricMatrix quotient_;
  std::vector<std::size_t> block_of_;
  std::vector<char> null_block_;
};

// rho_1 .. rho_depth. Pair computations within a level run on `threads`
// workers; the result is bit-identical for every worker count.
std::vector<SemimetricLevel> iterate_semimetric(const SemimetricMatrix& rho0,
                                                const DiscreteMeasure& mu,
                                                const PartitionChain& chain, std::size_t depth,
                                                unsigned threads = 1);

// sum_ij mu_i mu_j rho_ij
double mean_distance(const SemimetricMatrix& rho, const DiscreteMeasure& mu);
// Same integral evaluated on the quotient.
double mean_distance(const SemimetricLevel& rho, const DiscreteMeasure& mu);

struct StandardnessProfile {
  std::vector<double> c;  // c_0 .. c_N
  // c_N / c_0; a finite-scale indicator only, never a proof of standardness.
  double terminal_ratio = 0.0;
  bool strictly_decreasing = false;
};

// Throws std::logic_error if some c_n exceeds c_{n-1} by more than 1e-9.
StandardnessProfile standardness_profile(const SemimetricMatrix& rho0, const DiscreteMeasure& mu,
                                         const PartitionChain& chain, unsigned threads = 1);

// Finite product space prod_k [radices[k]] x [tail]. Point index is mixed
// radix with coordinate 0 least significant; xi_k forgets coordinates
// 0..k-1, so the xi_k-block of x is x / (r_0 ... r_{k-1}).
struct ProductModel {
  std::vector<std::size_t> radices;
  std::size_t tail = 1;

  std::size_t size() const;
  std::size_t coordinate(std::size_t point, std::size_t k) const;
  PartitionChain chain() const;
  DiscreteMeasure uniform_measure() const;
  // Normalized Hamming distance on coordinates 0..order-1, where the tail
  // counts as coordinate radices.size(). It only sees the first `order`
  // coordinates, i.e. it is a cylinder semimetric of that order.
  SemimetricMatrix cylinder_hamming(std::size_t order) const;
};

// 2^bits points, independent fair bits, chain of length bits - 1.
ProductModel dyadic_bernoulli_model(std::size_t bits);

}  // namespace filtlab
