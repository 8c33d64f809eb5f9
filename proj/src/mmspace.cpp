#include "filtlab/mmspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace filtlab {

double order_invariant_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  // Neumaier compensated summation over the sorted terms.
  double sum = 0.0;
  double carry = 0.0;
  for (double t : terms) {
    const double s = sum + t;
    if (std::fabs(sum) >= std::fabs(t)) {
      carry += (sum - s) + t;
    } else {
      carry += (t - s) + sum;
    }
    sum = s;
  }
  return sum + carry;
}

// ---------------------------------------------------------------------------
// SemimetricMatrix

SemimetricMatrix::SemimetricMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

SemimetricMatrix::SemimetricMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), d_(std::move(row_major)) {
  if (d_.size() != n * n) {
    throw StructuralError("semimetric: expected " + std::to_string(n * n) +
                          " entries, got " + std::to_string(d_.size()));
  }
  for (std::size_t k = 0; k < d_.size(); ++k) {
    if (!std::isfinite(d_[k]) || d_[k] < 0.0) {
      throw StructuralError("semimetric: entry (" + std::to_string(k / n) + "," +
                            std::to_string(k % n) + ") is negative or not finite");
    }
  }
}

SemimetricMatrix SemimetricMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> flat;
  flat.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw StructuralError("semimetric: row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " entries, expected " +
                            std::to_string(n));
    }
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return SemimetricMatrix(n, std::move(flat));
}

SemimetricMatrix SemimetricMatrix::discrete(std::size_t n) {
  SemimetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.d_[i * n + j] = (i == j) ? 0.0 : 1.0;
  return m;
}

SemimetricMatrix SemimetricMatrix::line(std::size_t n) {
  SemimetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m.d_[i * n + j] = static_cast<double>(i > j ? i - j : j - i);
  return m;
}

void SemimetricMatrix::set(std::size_t i, std::size_t j, double v) {
  if (!std::isfinite(v) || v < 0.0) throw StructuralError("semimetric: negative entry");
  d_[i * n_ + j] = v;
  d_[j * n_ + i] = v;
}

double SemimetricMatrix::max_entry() const {
  return d_.empty() ? 0.0 : *std::max_element(d_.begin(), d_.end());
}

SemimetricMatrix SemimetricMatrix::scaled(double t) const {
  if (!(t >= 0.0)) throw DomainError("semimetric: scale factor must be nonnegative");
  SemimetricMatrix m(*this);
  for (double& v : m.d_) v *= t;
  return m;
}

SemimetricMatrix SemimetricMatrix::relabeled(std::span<const std::size_t> perm) const {
  if (perm.size() != n_) throw StructuralError("semimetric: permutation size mismatch");
  SemimetricMatrix m(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) m.d_[perm[i] * n_ + perm[j]] = d_[i * n_ + j];
  return m;
}

std::string ValidityReport::describe() const {
  std::ostringstream os;
  if (valid()) {
    os << "valid";
    if (!triangle_checked) os << " (triangle inequality not checked)";
    return os.str();
  }
  if (!zero_diagonal) os << "nonzero diagonal at " << *diagonal_violation << "; ";
  if (!symmetric)
    os << "asymmetric at (" << symmetry_violation->first << ","
       << symmetry_violation->second << "); ";
  if (!triangle) {
    const auto& t = *triangle_violation;
    os << "triangle violated: d(" << t[0] << "," << t[1] << ") > d(" << t[0] << ","
       << t[2] << ") + d(" << t[2] << "," << t[1] << "); ";
  }
  return os.str();
}

ValidityReport validate_semimetric(const SemimetricMatrix& d, bool check_triangle,
                                   double tolerance) {
  ValidityReport report;
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n && report.zero_diagonal; ++i) {
    if (d(i, i) != 0.0) {
      report.zero_diagonal = false;
      report.diagonal_violation = i;
    }
  }
  for (std::size_t i = 0; i < n && report.symmetric; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::fabs(d(i, j) - d(j, i)) > tolerance) {
        report.symmetric = false;
        report.symmetry_violation = {i, j};
        break;
      }
    }
  }
  if (check_triangle) {
    report.triangle_checked = true;
    for (std::size_t i = 0; i < n && report.triangle; ++i) {
      for (std::size_t j = 0; j < n && report.triangle; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          if (d(i, j) > d(i, k) + d(k, j) + tolerance) {
            report.triangle = false;
            report.triangle_violation = std::array<std::size_t, 3>{i, j, k};
            break;
          }
        }
      }
    }
  }
  return report;
}

ValidityReport validate_semimetric(const std::vector<std::vector<double>>& rows,
                                   bool check_triangle, double tolerance) {
  return validate_semimetric(SemimetricMatrix::from_rows(rows), check_triangle, tolerance);
}

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw StructuralError("measure: empty support space");
  for (std::size_t i = 0; i < w_.size(); ++i) {
    if (!std::isfinite(w_[i]) || w_[i] < 0.0) {
      throw StructuralError("measure: weight " + std::to_string(i) +
                            " is negative or not finite");
    }
  }
  const double total = order_invariant_sum(w_);
  if (std::fabs(total - 1.0) > kMeasureTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "measure: weights sum to " << total << ", not 1";
    throw DomainError(os.str());
  }
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t n) {
  if (n == 0) throw StructuralError("measure: empty support space");
  return DiscreteMeasure(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

DiscreteMeasure DiscreteMeasure::dirac(std::size_t n, std::size_t at) {
  if (at >= n) throw StructuralError("measure: dirac point out of range");
  std::vector<double> w(n, 0.0);
  w[at] = 1.0;
  return DiscreteMeasure(std::move(w));
}

std::vector<std::size_t> DiscreteMeasure::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < w_.size(); ++i)
    if (w_[i] > 0.0) s.push_back(i);
  return s;
}

double DiscreteMeasure::mass_of(std::span<const std::size_t> indices) const {
  std::vector<double> terms;
  terms.reserve(indices.size());
  for (std::size_t i : indices) terms.push_back(w_.at(i));
  return order_invariant_sum(std::move(terms));
}

double DiscreteMeasure::entropy() const { return entropy_bits(w_); }

DiscreteMeasure DiscreteMeasure::relabeled(std::span<const std::size_t> perm) const {
  if (perm.size() != w_.size()) throw StructuralError("measure: permutation size mismatch");
  DiscreteMeasure m(*this);
  for (std::size_t i = 0; i < w_.size(); ++i) m.w_[perm[i]] = w_[i];
  return m;
}

double entropy_bits(std::span<const double> probabilities) {
  std::vector<double> terms;
  terms.reserve(probabilities.size());
  for (double p : probabilities)
    if (p > 0.0) terms.push_back(-p * std::log2(p));
  // A total mass a few ulps above 1 must not yield a negative entropy.
  return std::max(0.0, order_invariant_sum(std::move(terms)));
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(std::vector<std::size_t> block_of) : block_of_(std::move(block_of)) {
  if (block_of_.empty()) throw StructuralError("partition: empty space");
  std::unordered_map<std::size_t, std::size_t> renumber;
  for (std::size_t i = 0; i < block_of_.size(); ++i) {
    auto [it, inserted] = renumber.try_emplace(block_of_[i], blocks_.size());
    if (inserted) blocks_.emplace_back();
    block_of_[i] = it->second;
    blocks_[it->second].push_back(i);
  }
}

Partition Partition::from_blocks(std::size_t size,
                                 const std::vector<std::vector<std::size_t>>& blocks) {
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> block_of(size, kUnset);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw StructuralError("partition: empty block");
    for (std::size_t i : blocks[b]) {
      if (i >= size) throw StructuralError("partition: point index out of range");
      if (block_of[i] != kUnset) throw StructuralError("partition: blocks overlap");
      block_of[i] = b;
    }
  }
  for (std::size_t i = 0; i < size; ++i)
    if (block_of[i] == kUnset) throw StructuralError("partition: blocks do not cover the space");
  return Partition(std::move(block_of));
}

Partition Partition::singletons(std::size_t n) {
  std::vector<std::size_t> b(n);
  std::iota(b.begin(), b.end(), std::size_t{0});
  return Partition(std::move(b));
}

Partition Partition::trivial(std::size_t n) { return Partition(std::vector<std::size_t>(n, 0)); }

bool Partition::refines(const Partition& coarser) const {
  if (coarser.size() != size()) return false;
  for (const auto& blk : blocks_) {
    const std::size_t target = coarser.block_of(blk.front());
    for (std::size_t i : blk)
      if (coarser.block_of(i) != target) return false;
  }
  return true;
}

std::vector<double> Partition::block_masses(const DiscreteMeasure& mu) const {
  if (mu.size() != size()) throw StructuralError("partition: measure size mismatch");
  std::vector<double> masses(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) masses[b] = mu.mass_of(blocks_[b]);
  return masses;
}

// ---------------------------------------------------------------------------
// PartitionChain

PartitionChain::PartitionChain(std::size_t space_size, std::vector<Partition> partitions)
    : space_size_(space_size), partitions_(std::move(partitions)) {
  for (std::size_t k = 0; k < partitions_.size(); ++k) {
    if (partitions_[k].size() != space_size_)
      throw StructuralError("chain: partition " + std::to_string(k + 1) +
                            " has the wrong space size");
    if (k > 0 && !partitions_[k - 1].refines(partitions_[k]))
      throw StructuralError("chain: partition " + std::to_string(k + 1) +
                            " is not coarser than partition " + std::to_string(k));
  }
}

// ---------------------------------------------------------------------------

DiscreteMeasure conditional_measure(const DiscreteMeasure& mu, const Partition& xi,
                                    std::size_t block) {
  if (mu.size() != xi.size()) throw StructuralError("conditional: size mismatch");
  if (block >= xi.block_count()) throw StructuralError("conditional: no such block");
  const auto members = xi.block(block);
  const double mass = mu.mass_of(members);
  if (!(mass > 0.0))
    throw DegenerateBlockError("conditional: block " + std::to_string(block) +
                               " has zero mass");
  std::vector<double> w(mu.size(), 0.0);
  for (std::size_t i : members) w[i] = mu[i] / mass;
  return DiscreteMeasure(std::move(w));
}

double partition_entropy(const DiscreteMeasure& mu, const Partition& gamma) {
  return entropy_bits(gamma.block_masses(mu));
}

Partition partition_join(const Partition& g1, const Partition& g2) {
  if (g1.size() != g2.size()) throw StructuralError("join: size mismatch");
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> ids;
  std::vector<std::size_t> block_of(g1.size());
  for (std::size_t i = 0; i < g1.size(); ++i) {
    auto [it, _] = ids.try_emplace({g1.block_of(i), g2.block_of(i)}, ids.size());
    block_of[i] = it->second;
  }
  return Partition(std::move(block_of));
}

double partition_rokhlin_distance(const DiscreteMeasure& mu, const Partition& g1,
                                  const Partition& g2) {
  if (g1.size() != mu.size() || g2.size() != mu.size())
    throw StructuralError("rokhlin: size mismatch");
  const double joint = partition_entropy(mu, partition_join(g1, g2));
  const double d = 2.0 * joint - partition_entropy(mu, g1) - partition_entropy(mu, g2);
  return d < 0.0 ? 0.0 : d;
}

}  // namespace filtlab
