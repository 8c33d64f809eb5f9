#pragma once

// Labelled leaves of the one-root tree with level radices r_1..r_n, and the
// distance minimized over the tree's automorphism group (iterated wreath
// product of symmetric groups).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "filtlab/mmspace.hpp"

namespace filtlab {

// Base semimetric on leaf labels: either an explicit matrix over labels
// 0..k-1 or the normalized Hamming distance between `bits`-bit labels.
class LabelMetric {
 public:
  LabelMetric() = default;
  static LabelMetric matrix(SemimetricMatrix d);
  static LabelMetric hamming(unsigned bits);

  bool is_hamming() const { return !matrix_; }
  // Null for Hamming metrics.
  const SemimetricMatrix* table() const { return matrix_.get(); }
  unsigned bits() const { return bits_; }
  std::uint64_t alphabet_size() const;
  double operator()(std::uint64_t a, std::uint64_t b) const;

  friend bool operator==(const LabelMetric& a, const LabelMetric& b);

 private:
  unsigned bits_ = 0;
  std::shared_ptr<const SemimetricMatrix> matrix_;
};

struct TreeLeafSystem {
  // radices[0] is the branching at the root.
  std::vector<std::size_t> radices;
  // Leaf index is mixed radix with the root branch most significant.
  std::vector<std::uint64_t> labels;
  LabelMetric base;

  static TreeLeafSystem homogeneous(std::size_t r, std::size_t n,
                                    std::vector<std::uint64_t> labels, LabelMetric base);
  std::size_t height() const { return radices.size(); }
  std::size_t leaf_count() const;
  // Throws StructuralError on a label count or label range mismatch.
  void validate() const;
};

// min over automorphisms a of (1/#leaves) sum_i base(x_i, y_a(i)), computed by
// optimal child assignment at each node with subtrees memoized by canonical
// form. Exactly symmetric and exactly invariant under automorphisms of
// either argument.
double tree_distance(const TreeLeafSystem& x, const TreeLeafSystem& y);

// Explicit enumeration of the automorphism group. Requires at most 16
// leaves and a group of at most 10^7 elements.
double tree_distance_bruteforce(const TreeLeafSystem& x, const TreeLeafSystem& y);

// Leaf-wise average under the identity matching (trivial-group bound).
double identity_matching_distance(const TreeLeafSystem& x, const TreeLeafSystem& y);

// Leaf permutation of a uniformly random automorphism.
std::vector<std::size_t> random_tree_automorphism(const std::vector<std::size_t>& radices,
                                                  std::mt19937_64& rng);
// Every automorphism as a leaf permutation (same caps as the brute force).
std::vector<std::vector<std::size_t>> all_tree_automorphisms(
    const std::vector<std::size_t>& radices);
// Result label at perm[i] is the input label at i.
TreeLeafSystem permute_leaves(const TreeLeafSystem& x, const std::vector<std::size_t>& perm);

struct OrbitPartition {
  // Over words 0..k^(leaves)-1; leaf i of word w carries (w / k^i) % k.
  Partition gamma;
  std::size_t orbit_count = 0;
  double entropy = 0.0;  // bits, under the supplied word measure
  // Smallest word of each orbit, indexed by block id.
  std::vector<std::uint64_t> representatives;
};

inline constexpr std::uint64_t kMaxOrbitWords = std::uint64_t{1} << 20;

// Orbits of the automorphism group of the height-n, valence-r tree acting on
// k-letter leaf words. word_measure must have k^(r^n) entries.
OrbitPartition orbit_partition(std::size_t n, std::size_t r, std::size_t k,
                               const DiscreteMeasure& word_measure);
// Labels of a word in the encoding above.
std::vector<std::uint64_t> word_labels(std::uint64_t word, std::size_t k, std::size_t leaves);
// Product measure on k^leaves words with i.i.d. letters drawn from letter_law.
DiscreteMeasure iid_word_measure(const std::vector<double>& letter_law, std::size_t leaves);

struct ExponentialEntropy {
  std::vector<double> h;  // h_n = H(gamma_n) / (r_1 ... r_n), n = 1..N
  double estimate = 0.0;  // h_N
  bool nonincreasing = true;
};

// entropies[n-1] = H(gamma_n); radices[n-1] = r_n.
ExponentialEntropy exponential_entropy_estimate(const std::vector<double>& entropies,
                                                const std::vector<std::size_t>& radices);

}  // namespace filtlab
