#pragma once

// Exact Kantorovich distance between discrete measures.
//
// The transportation problem is solved by a primal network simplex that runs
// on scaled integers: weights and costs are mapped to a common binary grid
// (exact for ordinary inputs, since doubles are dyadic rationals), pivots are
// carried out in 128-bit arithmetic and the objective is accumulated exactly.
// The returned value is therefore a function of the problem data alone: any
// relabeling of rows/columns and any choice among tied optimal plans yields
// the same double.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "filtlab/mmspace.hpp"

namespace filtlab {

class Coupling {
 public:
  Coupling() = default;
  Coupling(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), q_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return q_[i * cols_ + j]; }
  double& at(std::size_t i, std::size_t j) { return q_[i * cols_ + j]; }
  std::span<const double> data() const { return q_; }

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> q_;
};

struct TransportResult {
  double value = 0.0;
  Coupling plan;
  std::size_t pivots = 0;
};

// Min sum q_ij * cost_ij over couplings with the given marginals. cost is
// row-major supply.size() x demand.size(). The two marginals must carry the
// same total mass up to kMeasureTolerance; the excess, if any, is discarded
// at zero cost.
TransportResult solve_transport(std::span<const double> supply,
                                std::span<const double> demand,
                                std::span<const double> cost);

TransportResult kantorovich(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const SemimetricMatrix& d);

// Test oracle: minimizes over every basic feasible solution of the
// transportation polytope (one per spanning tree of the bipartite support
// graph). Refuses supports larger than five points.
double kantorovich_bruteforce(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const SemimetricMatrix& d);

inline constexpr std::size_t kBruteforceMaxSupport = 5;

// "i,j,mass" lines for nonzero entries.
void write_plan_csv(std::ostream& os, const Coupling& plan);

}  // namespace filtlab
