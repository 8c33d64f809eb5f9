#include "filtlab/filtration.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "filtlab/parallel.hpp"
#include "filtlab/transport.hpp"

namespace filtlab {

SemimetricLevel::SemimetricLevel(SemimetricMatrix quotient, std::vector<std::size_t> block_of,
                                 std::vector<char> null_block)
    : quotient_(std::move(quotient)),
      block_of_(std::move(block_of)),
      null_block_(std::move(null_block)) {
  if (null_block_.size() != quotient_.size())
    throw StructuralError("level: null-block flags do not match quotient size");
  for (std::size_t b : block_of_)
    if (b >= quotient_.size()) throw StructuralError("level: block index out of range");
}

double SemimetricLevel::operator()(std::size_t x, std::size_t y) const {
  const std::size_t a = block_of_.at(x);
  const std::size_t b = block_of_.at(y);
  if (null_block_[a] || null_block_[b])
    throw DegenerateBlockError("level: point " + std::to_string(null_block_[a] ? x : y) +
                               " lies in a null block");
  return quotient_(a, b);
}

SemimetricMatrix SemimetricLevel::expand() const {
  const std::size_t n = block_of_.size();
  std::vector<double> full(n * n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) full[x * n + y] = quotient_(block_of_[x], block_of_[y]);
  return SemimetricMatrix(n, std::move(full));
}

namespace {

struct BlockLaw {
  std::vector<std::size_t> atoms;  // sub-block ids of the previous level
  std::vector<double> weights;     // conditional weights, sum to 1
  bool null = false;
};

}  // namespace

std::vector<SemimetricLevel> iterate_semimetric(const SemimetricMatrix& rho0,
                                                const DiscreteMeasure& mu,
                                                const PartitionChain& chain, std::size_t depth,
                                                unsigned threads) {
  const std::size_t n = mu.size();
  if (rho0.size() != n || chain.space_size() != n)
    throw StructuralError("iterate: semimetric, measure and chain sizes differ");
  if (depth > chain.depth()) throw StructuralError("iterate: chain is shorter than depth");

  std::vector<SemimetricLevel> levels;
  levels.reserve(depth);
  // Previous level on its own quotient; level 0 is X itself.
  const SemimetricMatrix* prev = &rho0;
  Partition prev_partition = Partition::singletons(n);

  for (std::size_t k = 1; k <= depth; ++k) {
    const Partition& xi = chain.level(k);
    const std::size_t blocks = xi.block_count();

    // Masses of previous-level blocks.
    std::vector<std::vector<double>> sub_terms(prev_partition.block_count());
    for (std::size_t x = 0; x < n; ++x) sub_terms[prev_partition.block_of(x)].push_back(mu[x]);
    std::vector<double> sub_mass(sub_terms.size());
    for (std::size_t c = 0; c < sub_terms.size(); ++c)
      sub_mass[c] = order_invariant_sum(std::move(sub_terms[c]));

    // Each xi_k block is a union of previous blocks; collect them once.
    std::vector<BlockLaw> law(blocks);
    std::vector<std::vector<double>> block_terms(blocks);
    std::vector<char> seen(prev_partition.block_count(), 0);
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t c = prev_partition.block_of(x);
      const std::size_t b = xi.block_of(x);
      block_terms[b].push_back(mu[x]);
      if (!seen[c]) {
        seen[c] = 1;
        law[b].atoms.push_back(c);
      }
    }
    std::vector<char> null_block(blocks, 0);
    for (std::size_t b = 0; b < blocks; ++b) {
      const double mass = order_invariant_sum(std::move(block_terms[b]));
      if (!(mass > 0.0)) {
        law[b].null = true;
        null_block[b] = 1;
        continue;
      }
      // Zero-mass sub-blocks are dropped; they carry no conditional weight.
      std::vector<std::size_t> kept;
      for (std::size_t c : law[b].atoms) {
        if (sub_mass[c] > 0.0) {
          kept.push_back(c);
          law[b].weights.push_back(sub_mass[c] / mass);
        }
      }
      law[b].atoms = std::move(kept);
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < blocks; ++a)
      for (std::size_t b = a + 1; b < blocks; ++b)
        if (!law[a].null && !law[b].null) pairs.emplace_back(a, b);
    std::vector<double> values(pairs.size());
    const SemimetricMatrix& base = *prev;
    parallel_for(pairs.size(), threads, [&](std::size_t p, unsigned) {
      const BlockLaw& la = law[pairs[p].first];
      const BlockLaw& lb = law[pairs[p].second];
      std::vector<double> cost(la.atoms.size() * lb.atoms.size());
      for (std::size_t i = 0; i < la.atoms.size(); ++i)
        for (std::size_t j = 0; j < lb.atoms.size(); ++j)
          cost[i * lb.atoms.size() + j] = base(la.atoms[i], lb.atoms[j]);
      values[p] = solve_transport(la.weights, lb.weights, cost).value;
    });

    SemimetricMatrix q(blocks);
    for (std::size_t p = 0; p < pairs.size(); ++p) q.set(pairs[p].first, pairs[p].second, values[p]);
    std::vector<std::size_t> block_of(n);
    for (std::size_t x = 0; x < n; ++x) block_of[x] = xi.block_of(x);
    levels.emplace_back(std::move(q), std::move(block_of), std::move(null_block));
    prev = &levels.back().quotient();
    prev_partition = xi;
  }
  return levels;
}

double mean_distance(const SemimetricMatrix& rho, const DiscreteMeasure& mu) {
  if (rho.size() != mu.size()) throw StructuralError("mean_distance: size mismatch");
  std::vector<double> terms;
  terms.reserve(rho.size() * rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (mu[i] == 0.0) continue;
    for (std::size_t j = 0; j < rho.size(); ++j)
      if (mu[j] != 0.0 && rho(i, j) != 0.0) terms.push_back(mu[i] * mu[j] * rho(i, j));
  }
  return order_invariant_sum(std::move(terms));
}

double mean_distance(const SemimetricLevel& rho, const DiscreteMeasure& mu) {
  if (rho.space_size() != mu.size()) throw StructuralError("mean_distance: size mismatch");
  const std::size_t blocks = rho.quotient().size();
  std::vector<std::vector<double>> parts(blocks);
  for (std::size_t x = 0; x < mu.size(); ++x) parts[rho.block_of(x)].push_back(mu[x]);
  std::vector<double> mass(blocks);
  for (std::size_t b = 0; b < blocks; ++b) mass[b] = order_invariant_sum(std::move(parts[b]));
  std::vector<double> terms;
  for (std::size_t a = 0; a < blocks; ++a) {
    if (rho.is_null(a)) continue;
    for (std::size_t b = 0; b < blocks; ++b)
      if (!rho.is_null(b) && rho.quotient()(a, b) != 0.0)
        terms.push_back(mass[a] * mass[b] * rho.quotient()(a, b));
  }
  return order_invariant_sum(std::move(terms));
}

StandardnessProfile standardness_profile(const SemimetricMatrix& rho0, const DiscreteMeasure& mu,
                                         const PartitionChain& chain, unsigned threads) {
  StandardnessProfile profile;
  profile.c.push_back(mean_distance(rho0, mu));
  for (const auto& level : iterate_semimetric(rho0, mu, chain, chain.depth(), threads))
    profile.c.push_back(mean_distance(level, mu));
  profile.strictly_decreasing = true;
  for (std::size_t k = 1; k < profile.c.size(); ++k) {
    if (profile.c[k] > profile.c[k - 1] + 1e-9)
      throw std::logic_error("standardness: c_" + std::to_string(k) + " exceeds c_" +
                             std::to_string(k - 1));
    if (!(profile.c[k] < profile.c[k - 1])) profile.strictly_decreasing = false;
  }
  profile.terminal_ratio = profile.c.front() > 0.0 ? profile.c.back() / profile.c.front() : 0.0;
  return profile;
}

std::size_t ProductModel::size() const {
  std::size_t s = tail;
  for (std::size_t r : radices) s *= r;
  return s;
}

std::size_t ProductModel::coordinate(std::size_t point, std::size_t k) const {
  for (std::size_t i = 0; i < k; ++i) point /= radices[i];
  return k < radices.size() ? point % radices[k] : point;
}

PartitionChain ProductModel::chain() const {
  const std::size_t n = size();
  std::vector<Partition> parts;
  std::size_t stride = 1;
  for (std::size_t r : radices) {
    stride *= r;
    std::vector<std::size_t> block_of(n);
    for (std::size_t x = 0; x < n; ++x) block_of[x] = x / stride;
    parts.emplace_back(std::move(block_of));
  }
  return PartitionChain(n, std::move(parts));
}

DiscreteMeasure ProductModel::uniform_measure() const { return DiscreteMeasure::uniform(size()); }

SemimetricMatrix ProductModel::cylinder_hamming(std::size_t order) const {
  if (order == 0 || order > radices.size() + 1)
    throw DomainError("cylinder_hamming: order exceeds the number of coordinates");
  const std::size_t n = size();
  SemimetricMatrix d(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      std::size_t diff = 0;
      for (std::size_t k = 0; k < order; ++k) diff += coordinate(x, k) != coordinate(y, k);
      d.set(x, y, static_cast<double>(diff) / static_cast<double>(order));
    }
  }
  return d;
}

ProductModel dyadic_bernoulli_model(std::size_t bits) {
  if (bits < 2) throw DomainError("dyadic model needs at least 2 bits");
  return ProductModel{std::vector<std::size_t>(bits - 1, 2), 2};
}

}  // namespace filtlab
