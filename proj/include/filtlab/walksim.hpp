#pragma once

// Finite models of the filtration of pasts of a random walk over a Bernoulli
// scenery.
//
// A xi_n-element fixes the scenery and the walker's position at time n (the
// tail); its points are the (2s)^n increment words of the first n steps, so
// the element is the height-n tree with valence r = 2s. Reading a leaf word
// w_1..w_n backward from the tail, the node at depth j sits at position
// tail * g_{w_1} ... g_{w_j} (the walker at time n - j). A leaf is labelled
// by the scenery bits at depths n - m' + 1 .. n with m' = min(m, n), i.e.
// the bits the walker reads at times m' - 1 .. 0; the base metric is the
// normalized Hamming distance on those m' bits.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "filtlab/groups.hpp"
#include "filtlab/mmspace.hpp"
#include "filtlab/treewalk.hpp"

namespace filtlab {

struct WalkPoint {
  Scenery scenery;
  GroupElement tail_position;
  std::size_t observation_depth = 1;  // m

  static WalkPoint sampled(const GroupSpec& spec, std::uint64_t seed, std::size_t m);
};

inline constexpr std::uint64_t kDefaultLeafCap = std::uint64_t{1} << 14;

// Materialized leaf labels. Throws SizeError when (2s)^n exceeds leaf_cap.
TreeLeafSystem leaf_observations(const WalkPoint& p, const GroupSpec& spec, std::size_t n,
                                 std::uint64_t leaf_cap = kDefaultLeafCap);

// rho_n(p, q) without materializing leaves: subtrees are interned by the
// positions they can reach, and the node assignment problems run on integer
// mismatch counts. Equals tree_distance of the two leaf systems. Both points
// must share the observation depth.
double pair_distance(const WalkPoint& p, const WalkPoint& q, const GroupSpec& spec,
                     std::size_t n, std::uint64_t leaf_cap = kDefaultLeafCap);

// Batch engine for many distances among a fixed set of points.
class WalkDistanceEngine {
 public:
  WalkDistanceEngine(const GroupSpec& spec, std::size_t n, std::vector<WalkPoint> points,
                     unsigned threads = 1, std::uint64_t leaf_cap = kDefaultLeafCap);
  ~WalkDistanceEngine();
  WalkDistanceEngine(const WalkDistanceEngine&) = delete;
  WalkDistanceEngine& operator=(const WalkDistanceEngine&) = delete;

  std::size_t size() const;
  double distance(std::size_t i, std::size_t j) const;
  // Distances for the listed index pairs, computed on the engine's workers.
  std::vector<double> distances(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) const;
  SemimetricMatrix matrix() const;

 private:
  struct Impl;
  Impl* impl_;
};

struct Estimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t samples = 0;
};

// Fraction of K sampled points q with rho_n(p, q) < epsilon, with a 95%
// Wilson interval. Sample i uses seed derive_seed(seed, 2, i).
Estimate ball_measure_estimate(const WalkPoint& p, const GroupSpec& spec, std::size_t n,
                               double epsilon, std::size_t samples, std::uint64_t seed,
                               unsigned threads = 1, std::uint64_t leaf_cap = kDefaultLeafCap);
// Same sample, several radii and depths at once; result[n_index][eps_index].
std::vector<std::vector<Estimate>> ball_measure_sweep(const WalkPoint& p, const GroupSpec& spec,
                                                      const std::vector<std::size_t>& depths,
                                                      const std::vector<double>& epsilons,
                                                      std::size_t samples, std::uint64_t seed,
                                                      unsigned threads = 1,
                                                      std::uint64_t leaf_cap = kDefaultLeafCap);

struct DistanceProfileRow {
  std::size_t n = 0;
  Estimate c;                   // mean of rho_n over sampled pairs, normal 95% CI
  Estimate identity_matching;   // same pairs, trivial-group bound
};

// c_n for n = 1..n_max from K independent pairs per n (the same pairs at
// every n). Pair k uses seeds derive_seed(seed, 1, 2k) and 2k + 1.
std::vector<DistanceProfileRow> mean_distance_profile(const GroupSpec& spec, std::size_t n_max,
                                                      std::size_t m, std::size_t pairs,
                                                      std::uint64_t seed, unsigned threads = 1,
                                                      std::uint64_t leaf_cap = kDefaultLeafCap);

// Sampled points of a distance matrix: point i uses derive_seed(seed, 3, i).
std::vector<WalkPoint> sample_points(const GroupSpec& spec, std::size_t count, std::size_t m,
                                     std::uint64_t seed);

}  // namespace filtlab
