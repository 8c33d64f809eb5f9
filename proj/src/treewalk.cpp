#include "filtlab/treewalk.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace filtlab {

LabelMetric LabelMetric::matrix(SemimetricMatrix d) {
  LabelMetric m;
  m.matrix_ = std::make_shared<const SemimetricMatrix>(std::move(d));
  return m;
}

LabelMetric LabelMetric::hamming(unsigned bits) {
  if (bits == 0 || bits > 63) throw DomainError("hamming label metric needs 1..63 bits");
  LabelMetric m;
  m.bits_ = bits;
  return m;
}

std::uint64_t LabelMetric::alphabet_size() const {
  return matrix_ ? matrix_->size() : (std::uint64_t{1} << bits_);
}

double LabelMetric::operator()(std::uint64_t a, std::uint64_t b) const {
  if (matrix_) return (*matrix_)(a, b);
  return static_cast<double>(std::popcount(a ^ b)) / static_cast<double>(bits_);
}

bool operator==(const LabelMetric& a, const LabelMetric& b) {
  if (a.is_hamming() != b.is_hamming()) return false;
  if (a.is_hamming()) return a.bits_ == b.bits_;
  return a.matrix_ == b.matrix_ || *a.matrix_ == *b.matrix_;
}

TreeLeafSystem TreeLeafSystem::homogeneous(std::size_t r, std::size_t n,
                                           std::vector<std::uint64_t> labels, LabelMetric base) {
  TreeLeafSystem t{std::vector<std::size_t>(n, r), std::move(labels), std::move(base)};
  t.validate();
  return t;
}

std::size_t TreeLeafSystem::leaf_count() const {
  std::size_t c = 1;
  for (std::size_t r : radices) c *= r;
  return c;
}

void TreeLeafSystem::validate() const {
  for (std::size_t r : radices)
    if (r < 1) throw StructuralError("tree: radix must be positive");
  if (labels.size() != leaf_count())
    throw StructuralError("tree: label count differs from the number of leaves");
  if (base.alphabet_size() == 0) throw StructuralError("tree: base metric not set");
  for (auto l : labels)
    if (l >= base.alphabet_size()) throw StructuralError("tree: label outside the base alphabet");
}

namespace {

void check_shapes(const TreeLeafSystem& x, const TreeLeafSystem& y) {
  x.validate();
  y.validate();
  if (x.radices != y.radices) throw StructuralError("tree: shapes differ");
  if (!(x.base == y.base)) throw StructuralError("tree: base metrics differ");
}

using Exact = __int128;
constexpr Exact kExactInf = std::numeric_limits<Exact>::max() / 2;

// Leaf distances as integers on a common binary grid, so that sums over
// leaves are exact and do not depend on the order of summation. Hamming
// labels count mismatched bits; table metrics are scaled by 2^-grid.
class LeafCost {
 public:
  LeafCost(const LabelMetric& m, std::size_t leaves) : m_(m) {
    if (m.is_hamming()) {
      denom_ = static_cast<double>(m.bits());
      return;
    }
    const SemimetricMatrix& d = *m.table();
    int top = std::numeric_limits<int>::min();
    int low = std::numeric_limits<int>::max();
    for (double v : d.data()) {
      if (v == 0.0) continue;
      int e = 0;
      const double f = std::frexp(v, &e);
      const auto mant = static_cast<std::int64_t>(std::ldexp(f, 53));
      top = std::max(top, e);
      low = std::min(low, e - 53 + std::countr_zero(static_cast<std::uint64_t>(mant)));
    }
    if (top == std::numeric_limits<int>::min()) top = low = 0;
    // Sums over all leaves must stay below 2^125; coarsen the grid (and
    // round) only when the entries span more binary orders than that allows.
    const int headroom = 125 - std::bit_width(leaves);
    grid_ = std::max(low, top - headroom);
    const std::size_t a = d.size();
    table_.resize(a * a);
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < a; ++j) table_[i * a + j] = to_grid(d(i, j));
    alphabet_ = a;
  }

  Exact operator()(std::uint64_t a, std::uint64_t b) const {
    if (m_.is_hamming()) return std::popcount(a ^ b);
    return table_[a * alphabet_ + b];
  }

  // total / leaves in the metric's units, rounded once per operation.
  double finish(Exact total, std::size_t leaves) const {
    if (m_.is_hamming()) return static_cast<double>(total) / (static_cast<double>(leaves) * denom_);
    return std::ldexp(static_cast<double>(total), grid_) / static_cast<double>(leaves);
  }

 private:
  Exact to_grid(double v) const {
    if (v == 0.0) return 0;
    int e = 0;
    const double f = std::frexp(v, &e);
    const auto mant = static_cast<std::int64_t>(std::ldexp(f, 53));
    const int shift = e - 53 - grid_;
    if (shift >= 0) return static_cast<Exact>(mant) << shift;
    return static_cast<Exact>(std::llround(std::ldexp(static_cast<double>(mant), shift)));
  }

  const LabelMetric& m_;
  double denom_ = 1.0;
  int grid_ = 0;
  std::size_t alphabet_ = 0;
  std::vector<Exact> table_;
};

Exact min_assignment(const std::vector<Exact>& cost, std::size_t r) {
  // dp[mask]: best sum assigning the first popcount(mask) rows to the
  // columns in mask.
  const std::size_t full = std::size_t{1} << r;
  std::vector<Exact> dp(full, kExactInf);
  dp[0] = 0;
  for (std::size_t mask = 1; mask < full; ++mask) {
    const std::size_t row = static_cast<std::size_t>(std::popcount(mask)) - 1;
    Exact best = kExactInf;
    for (std::size_t j = 0; j < r; ++j)
      if (mask >> j & 1) best = std::min(best, dp[mask ^ (std::size_t{1} << j)] + cost[row * r + j]);
    dp[mask] = best;
  }
  return dp[full - 1];
}

// Subtrees of both trees share one rank space per height; a rank is the
// position of the subtree's canonical form in sorted order, so it does not
// depend on where the subtree sits.
class JointCanon {
 public:
  JointCanon(const TreeLeafSystem& x, const TreeLeafSystem& y, const LeafCost& cost) : cost_(cost) {
    const std::size_t n = x.height();
    children_.resize(n + 1);
    // Height 0: leaves, ranked by label.
    std::vector<std::uint64_t> labels(x.labels);
    labels.insert(labels.end(), y.labels.begin(), y.labels.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    leaf_label_ = labels;
    auto rank_leaves = [&](const std::vector<std::uint64_t>& ls) {
      std::vector<std::uint32_t> out(ls.size());
      for (std::size_t i = 0; i < ls.size(); ++i)
        out[i] = static_cast<std::uint32_t>(
            std::lower_bound(labels.begin(), labels.end(), ls[i]) - labels.begin());
      return out;
    };
    std::vector<std::uint32_t> rx = rank_leaves(x.labels);
    std::vector<std::uint32_t> ry = rank_leaves(y.labels);
    for (std::size_t h = 1; h <= n; ++h) {
      const std::size_t r = x.radices[n - h];
      auto keys_of = [&](const std::vector<std::uint32_t>& ranks) {
        std::vector<std::vector<std::uint32_t>> keys(ranks.size() / r);
        for (std::size_t v = 0; v < keys.size(); ++v) {
          keys[v].assign(ranks.begin() + v * r, ranks.begin() + (v + 1) * r);
          std::sort(keys[v].begin(), keys[v].end());
        }
        return keys;
      };
      auto kx = keys_of(rx);
      auto ky = keys_of(ry);
      std::vector<std::vector<std::uint32_t>> all(kx);
      all.insert(all.end(), ky.begin(), ky.end());
      std::sort(all.begin(), all.end());
      all.erase(std::unique(all.begin(), all.end()), all.end());
      auto rank_keys = [&](const std::vector<std::vector<std::uint32_t>>& ks) {
        std::vector<std::uint32_t> out(ks.size());
        for (std::size_t v = 0; v < ks.size(); ++v)
          out[v] = static_cast<std::uint32_t>(
              std::lower_bound(all.begin(), all.end(), ks[v]) - all.begin());
        return out;
      };
      rx = rank_keys(kx);
      ry = rank_keys(ky);
      children_[h] = std::move(all);
    }
    root_x_ = rx.at(0);
    root_y_ = ry.at(0);
    memo_.resize(n + 1);
  }

  // Unnormalized: sum of leaf costs under the best automorphism.
  Exact distance(std::size_t h, std::uint32_t a, std::uint32_t b) {
    if (a == b) return 0;
    if (a > b) std::swap(a, b);
    if (h == 0) return cost_(leaf_label_[a], leaf_label_[b]);
    const std::uint64_t key = (std::uint64_t{a} << 32) | b;
    auto it = memo_[h].find(key);
    if (it != memo_[h].end()) return it->second;
    const auto& ca = children_[h][a];
    const auto& cb = children_[h][b];
    const std::size_t r = ca.size();
    std::vector<Exact> cost(r * r);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) cost[i * r + j] = distance(h - 1, ca[i], cb[j]);
    const Exact v = min_assignment(cost, r);
    memo_[h].emplace(key, v);
    return v;
  }

  std::uint32_t root_x() const { return root_x_; }
  std::uint32_t root_y() const { return root_y_; }

 private:
  const LeafCost& cost_;
  std::vector<std::uint64_t> leaf_label_;
  std::vector<std::vector<std::vector<std::uint32_t>>> children_;
  std::vector<std::unordered_map<std::uint64_t, Exact>> memo_;
  std::uint32_t root_x_ = 0;
  std::uint32_t root_y_ = 0;
};

std::size_t factorial(std::size_t r) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= r; ++i) f *= i;
  return f;
}

void check_enumerable(const std::vector<std::size_t>& radices) {
  std::size_t leaves = 1;
  double order = 1.0;
  std::size_t nodes = 1;
  for (std::size_t r : radices) {
    leaves *= r;
    if (leaves > 16) throw SizeError("tree brute force: more than 16 leaves");
    order *= std::pow(static_cast<double>(factorial(r)), static_cast<double>(nodes));
    nodes *= r;
  }
  if (order > 1e7) throw SizeError("tree brute force: automorphism group too large");
}

}  // namespace

double tree_distance(const TreeLeafSystem& x, const TreeLeafSystem& y) {
  check_shapes(x, y);
  for (std::size_t r : x.radices)
    if (r > 16) throw SizeError("tree: radix above 16");
  const LeafCost cost(x.base, x.leaf_count());
  JointCanon canon(x, y, cost);
  return cost.finish(canon.distance(x.height(), canon.root_x(), canon.root_y()), x.leaf_count());
}

std::vector<std::vector<std::size_t>> all_tree_automorphisms(
    const std::vector<std::size_t>& radices) {
  check_enumerable(radices);
  const std::size_t n = radices.size();
  // One permutation per internal node, nodes listed level by level.
  std::vector<std::size_t> node_radix;
  std::vector<std::size_t> level_offset(n + 1, 0);
  std::size_t count = 1;
  for (std::size_t d = 0; d < n; ++d) {
    level_offset[d] = node_radix.size();
    for (std::size_t v = 0; v < count; ++v) node_radix.push_back(radices[d]);
    count *= radices[d];
  }
  const std::size_t leaves = count;
  std::vector<std::vector<std::size_t>> perms(node_radix.size());
  for (std::size_t v = 0; v < perms.size(); ++v) {
    perms[v].resize(node_radix[v]);
    std::iota(perms[v].begin(), perms[v].end(), 0);
  }
  std::vector<std::vector<std::size_t>> result;
  while (true) {
    std::vector<std::size_t> a(leaves);
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
      // Digits of the leaf, root first.
      std::vector<std::size_t> digits(n);
      std::size_t rest = leaf;
      for (std::size_t d = n; d-- > 0;) {
        digits[d] = rest % radices[d];
        rest /= radices[d];
      }
      std::size_t node = 0;  // index of the source node within its level
      std::size_t image = 0;
      for (std::size_t d = 0; d < n; ++d) {
        image = image * radices[d] + perms[level_offset[d] + node][digits[d]];
        node = node * radices[d] + digits[d];
      }
      a[leaf] = image;
    }
    result.push_back(std::move(a));
    std::size_t v = 0;
    while (v < perms.size() && !std::next_permutation(perms[v].begin(), perms[v].end())) ++v;
    if (v == perms.size()) break;
  }
  return result;
}

double tree_distance_bruteforce(const TreeLeafSystem& x, const TreeLeafSystem& y) {
  check_shapes(x, y);
  const auto autos = all_tree_automorphisms(x.radices);
  const LeafCost cost(x.base, x.leaf_count());
  Exact best = kExactInf;
  for (const auto& a : autos) {
    Exact s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += cost(x.labels[i], y.labels[a[i]]);
    best = std::min(best, s);
  }
  return cost.finish(best, x.leaf_count());
}

double identity_matching_distance(const TreeLeafSystem& x, const TreeLeafSystem& y) {
  check_shapes(x, y);
  const LeafCost cost(x.base, x.leaf_count());
  Exact s = 0;
  for (std::size_t i = 0; i < x.labels.size(); ++i) s += cost(x.labels[i], y.labels[i]);
  return cost.finish(s, x.leaf_count());
}

std::vector<std::size_t> random_tree_automorphism(const std::vector<std::size_t>& radices,
                                                  std::mt19937_64& rng) {
  const std::size_t n = radices.size();
  std::size_t leaves = 1;
  for (std::size_t r : radices) leaves *= r;
  // perm[d][node] for each internal node, drawn lazily level by level.
  std::vector<std::vector<std::vector<std::size_t>>> perms(n);
  std::size_t count = 1;
  for (std::size_t d = 0; d < n; ++d) {
    perms[d].resize(count);
    for (auto& p : perms[d]) {
      p.resize(radices[d]);
      std::iota(p.begin(), p.end(), 0);
      std::shuffle(p.begin(), p.end(), rng);
    }
    count *= radices[d];
  }
  std::vector<std::size_t> a(leaves);
  std::vector<std::size_t> digits(n);
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    std::size_t rest = leaf;
    for (std::size_t d = n; d-- > 0;) {
      digits[d] = rest % radices[d];
      rest /= radices[d];
    }
    std::size_t node = 0;
    std::size_t image = 0;
    for (std::size_t d = 0; d < n; ++d) {
      image = image * radices[d] + perms[d][node][digits[d]];
      node = node * radices[d] + digits[d];
    }
    a[leaf] = image;
  }
  return a;
}

TreeLeafSystem permute_leaves(const TreeLeafSystem& x, const std::vector<std::size_t>& perm) {
  if (perm.size() != x.labels.size()) throw StructuralError("permute_leaves: size mismatch");
  TreeLeafSystem out = x;
  for (std::size_t i = 0; i < perm.size(); ++i) out.labels[perm[i]] = x.labels[i];
  return out;
}

std::vector<std::uint64_t> word_labels(std::uint64_t word, std::size_t k, std::size_t leaves) {
  std::vector<std::uint64_t> l(leaves);
  for (std::size_t i = 0; i < leaves; ++i) {
    l[i] = word % k;
    word /= k;
  }
  return l;
}

namespace {

std::uint64_t word_count(std::size_t k, std::size_t leaves) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < leaves; ++i) {
    if (total > kMaxOrbitWords / std::max<std::size_t>(k, 1) + 1) return kMaxOrbitWords + 1;
    total *= k;
  }
  return total;
}

// Canonical representative: children canonicalized, then sorted, at every
// node. Labels are written in place over [lo, lo + size).
void canonicalize(std::vector<std::uint64_t>& labels, std::size_t lo, std::size_t size,
                  std::size_t r) {
  if (size == 1) return;
  const std::size_t child = size / r;
  for (std::size_t c = 0; c < r; ++c) canonicalize(labels, lo + c * child, child, r);
  std::vector<std::vector<std::uint64_t>> parts(r);
  for (std::size_t c = 0; c < r; ++c)
    parts[c].assign(labels.begin() + lo + c * child, labels.begin() + lo + (c + 1) * child);
  std::sort(parts.begin(), parts.end());
  for (std::size_t c = 0; c < r; ++c)
    std::copy(parts[c].begin(), parts[c].end(), labels.begin() + lo + c * child);
}

}  // namespace

OrbitPartition orbit_partition(std::size_t n, std::size_t r, std::size_t k,
                               const DiscreteMeasure& word_measure) {
  if (r < 1 || k < 1) throw DomainError("orbit_partition: r and k must be positive");
  std::size_t leaves = 1;
  for (std::size_t i = 0; i < n; ++i) {
    leaves *= r;
    if (leaves > 64) throw SizeError("orbit_partition: too many leaves");
  }
  const std::uint64_t words = word_count(k, leaves);
  if (words > kMaxOrbitWords) throw SizeError("orbit_partition: more than 2^20 words");
  if (word_measure.size() != words)
    throw StructuralError("orbit_partition: word measure has the wrong size");

  std::vector<std::size_t> canonical(words);
  for (std::uint64_t w = 0; w < words; ++w) {
    auto labels = word_labels(w, k, leaves);
    canonicalize(labels, 0, leaves, r);
    std::uint64_t c = 0;
    for (std::size_t i = leaves; i-- > 0;) c = c * k + labels[i];
    canonical[w] = c;
  }
  OrbitPartition out;
  out.gamma = Partition(std::move(canonical));
  out.orbit_count = out.gamma.block_count();
  out.entropy = partition_entropy(word_measure, out.gamma);
  out.representatives.resize(out.orbit_count);
  for (std::size_t b = 0; b < out.orbit_count; ++b) out.representatives[b] = out.gamma.block(b)[0];
  return out;
}

DiscreteMeasure iid_word_measure(const std::vector<double>& letter_law, std::size_t leaves) {
  const std::size_t k = letter_law.size();
  const std::uint64_t words = word_count(k, leaves);
  if (words > kMaxOrbitWords) throw SizeError("iid_word_measure: more than 2^20 words");
  std::vector<double> w(words);
  for (std::uint64_t word = 0; word < words; ++word) {
    double p = 1.0;
    for (auto l : word_labels(word, k, leaves)) p *= letter_law[l];
    w[word] = p;
  }
  // Products of rounded letter probabilities may drift off 1 by a few ulps.
  const double total = order_invariant_sum(w);
  for (double& x : w) x /= total;
  return DiscreteMeasure(std::move(w));
}

ExponentialEntropy exponential_entropy_estimate(const std::vector<double>& entropies,
                                                const std::vector<std::size_t>& radices) {
  if (entropies.size() != radices.size())
    throw StructuralError("exponential entropy: one radix per level required");
  ExponentialEntropy out;
  double scale = 1.0;
  for (std::size_t i = 0; i < entropies.size(); ++i) {
    scale *= static_cast<double>(radices[i]);
    out.h.push_back(entropies[i] / scale);
    if (i > 0 && out.h[i] > out.h[i - 1] + 1e-9) out.nonincreasing = false;
  }
  out.estimate = out.h.empty() ? 0.0 : out.h.back();
  return out;
}

}  // namespace filtlab
