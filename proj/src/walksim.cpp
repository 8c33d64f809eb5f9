#include "filtlab/walksim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "filtlab/parallel.hpp"

namespace filtlab {

WalkPoint WalkPoint::sampled(const GroupSpec& spec, std::uint64_t seed, std::size_t m) {
  return {Scenery(seed), identity(spec), m};
}

namespace {

std::uint64_t leaf_count(const GroupSpec& spec, std::size_t n, std::uint64_t cap) {
  std::uint64_t leaves = 1;
  for (std::size_t k = 0; k < n; ++k) {
    leaves *= spec.alphabet_size();
    if (leaves > cap) throw SizeError("walk: (2s)^n exceeds the leaf cap");
  }
  return leaves;
}

std::size_t effective_depth(const WalkPoint& p, std::size_t n) {
  if (p.observation_depth == 0) throw DomainError("walk: observation depth must be positive");
  return std::min(p.observation_depth, n);
}

bool labeled(std::size_t depth, std::size_t n, std::size_t mprime) {
  return depth >= 1 && depth + mprime >= n + 1;
}

// Distinct positions per depth, reached from the tail through the walk
// alphabet, with the scenery bit of every position at labelled depths and
// the number of words reaching it.
struct PositionTree {
  std::vector<std::vector<std::uint32_t>> child;  // depth k < n: [p * r + s]
  std::vector<std::vector<std::uint8_t>> bits;    // depth k: [p]
  std::vector<std::vector<std::uint64_t>> paths;  // depth k: [p]
};

PositionTree explore(const WalkPoint& p, const GroupSpec& spec, std::size_t n) {
  if (!(p.tail_position.spec == spec)) throw StructuralError("walk: tail lies in another group");
  const std::size_t r = spec.alphabet_size();
  const std::size_t mprime = effective_depth(p, n);
  PositionTree t;
  t.child.resize(n);
  t.bits.resize(n + 1);
  t.paths.resize(n + 1);
  std::vector<GroupElement> layer = {p.tail_position};
  t.bits[0] = {0};
  t.paths[0] = {1};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<GroupElement> next;
    std::unordered_map<GroupElement, std::uint32_t> index;
    t.child[k].resize(layer.size() * r);
    for (std::size_t q = 0; q < layer.size(); ++q) {
      for (std::uint32_t s = 0; s < r; ++s) {
        const std::uint32_t sym[1] = {s};
        GroupElement g = apply_word(layer[q], sym);
        auto [it, fresh] = index.try_emplace(g, static_cast<std::uint32_t>(next.size()));
        if (fresh) next.push_back(std::move(g));
        t.child[k][q * r + s] = it->second;
      }
    }
    t.paths[k + 1].assign(next.size(), 0);
    for (std::size_t q = 0; q < layer.size(); ++q)
      for (std::size_t s = 0; s < r; ++s) t.paths[k + 1][t.child[k][q * r + s]] += t.paths[k][q];
    t.bits[k + 1].assign(next.size(), 0);
    if (labeled(k + 1, n, mprime))
      for (std::size_t q = 0; q < next.size(); ++q)
        t.bits[k + 1][q] = static_cast<std::uint8_t>(p.scenery.bit(next[q]));
    layer = std::move(next);
  }
  return t;
}

// Subtree classes shared by every point of an engine. A class at depth k is
// the sorted list of (bit, class) over its r children.
struct Interner {
  std::size_t r = 0;
  std::vector<std::map<std::vector<std::uint64_t>, std::uint32_t>> table;
  std::vector<std::vector<std::uint64_t>> keys;  // depth k: flat r * classes

  std::uint32_t intern(std::size_t k, const std::vector<std::uint64_t>& key) {
    auto [it, fresh] = table[k].try_emplace(key, static_cast<std::uint32_t>(table[k].size()));
    if (fresh) keys[k].insert(keys[k].end(), key.begin(), key.end());
    return it->second;
  }
  std::size_t classes(std::size_t k) const { return table[k].size(); }
};

struct PointTree {
  std::vector<std::vector<std::uint32_t>> ids;    // depth k: sorted distinct classes
  std::vector<std::vector<std::uint32_t>> local;  // depth k < n: [node * r + i] child local index
  std::vector<std::vector<std::uint8_t>> bit;     // depth k < n: [node * r + i]
};

constexpr std::uint64_t kBit = std::uint64_t{1} << 32;

PointTree intern_tree(const PositionTree& pos, Interner& in, std::size_t n) {
  const std::size_t r = in.r;
  PointTree t;
  t.ids.resize(n + 1);
  t.local.resize(n);
  t.bit.resize(n);
  std::vector<std::vector<std::uint32_t>> cls(n + 1);
  cls[n].assign(pos.bits[n].size(), in.intern(n, {}));
  std::vector<std::uint64_t> key(r);
  for (std::size_t k = n; k-- > 0;) {
    cls[k].resize(pos.bits[k].size());
    for (std::size_t q = 0; q < cls[k].size(); ++q) {
      for (std::size_t s = 0; s < r; ++s) {
        const std::uint32_t c = pos.child[k][q * r + s];
        key[s] = pos.bits[k + 1][c] * kBit + cls[k + 1][c];
      }
      std::sort(key.begin(), key.end());
      cls[k][q] = in.intern(k, key);
    }
  }
  for (std::size_t k = 0; k <= n; ++k) {
    t.ids[k] = cls[k];
    std::sort(t.ids[k].begin(), t.ids[k].end());
    t.ids[k].erase(std::unique(t.ids[k].begin(), t.ids[k].end()), t.ids[k].end());
  }
  for (std::size_t k = 0; k < n; ++k) {
    t.local[k].resize(t.ids[k].size() * r);
    t.bit[k].resize(t.ids[k].size() * r);
    for (std::size_t v = 0; v < t.ids[k].size(); ++v) {
      const std::uint64_t* kk = &in.keys[k][static_cast<std::size_t>(t.ids[k][v]) * r];
      for (std::size_t i = 0; i < r; ++i) {
        const auto child = static_cast<std::uint32_t>(kk[i] % kBit);
        t.bit[k][v * r + i] = static_cast<std::uint8_t>(kk[i] / kBit);
        t.local[k][v * r + i] = static_cast<std::uint32_t>(
            std::lower_bound(t.ids[k + 1].begin(), t.ids[k + 1].end(), child) - t.ids[k + 1].begin());
      }
    }
  }
  return t;
}

// min over permutations of sum_i cost[i * r + pi(i)], integer costs.
std::int64_t min_assignment(const std::int64_t* cost, std::size_t r, std::vector<std::int64_t>& dp) {
  if (r == 1) return cost[0];
  if (r == 2) return std::min(cost[0] + cost[3], cost[1] + cost[2]);
  const std::size_t full = std::size_t{1} << r;
  dp.assign(full, std::numeric_limits<std::int64_t>::max());
  dp[0] = 0;
  for (std::size_t mask = 1; mask < full; ++mask) {
    const std::size_t row = static_cast<std::size_t>(__builtin_popcountll(mask)) - 1;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::size_t j = 0; j < r; ++j)
      if (mask >> j & 1) best = std::min(best, dp[mask ^ (std::size_t{1} << j)] + cost[row * r + j]);
    dp[mask] = best;
  }
  return dp[full - 1];
}

constexpr std::size_t kDenseClassLimit = 2048;

}  // namespace

struct WalkDistanceEngine::Impl {
  GroupSpec spec;
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t mprime = 0;
  unsigned threads = 1;
  std::vector<WalkPoint> points;
  Interner in;
  std::vector<PointTree> trees;
  std::vector<std::int64_t> weight;  // weight[k]: leaves under a depth-k node if labelled
  // Levels k >= dense_from keep a full class-by-class table.
  std::size_t dense_from = 0;
  std::vector<std::vector<std::int64_t>> dense;

  std::int64_t dense_value(std::size_t k, std::uint32_t a, std::uint32_t b) const {
    return dense[k][static_cast<std::size_t>(a) * in.classes(k) + b];
  }

  void build_dense() {
    dense.resize(n + 1);
    dense_from = n;
    dense[n].assign(1, 0);
    std::vector<std::int64_t> dp;
    std::vector<std::int64_t> cost(r * r);
    for (std::size_t k = n; k-- > 0;) {
      const std::size_t g = in.classes(k);
      if (g > kDenseClassLimit) break;
      dense[k].assign(g * g, 0);
      std::vector<std::size_t> rows(g);
      parallel_for(g, threads, [&](std::size_t a, unsigned) {
        std::vector<std::int64_t> c(r * r);
        std::vector<std::int64_t> scratch;
        const std::uint64_t* ka = &in.keys[k][a * r];
        for (std::size_t b = a + 1; b < g; ++b) {
          const std::uint64_t* kb = &in.keys[k][b * r];
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) {
              const bool mismatch = (ka[i] / kBit) != (kb[j] / kBit);
              c[i * r + j] = (mismatch ? weight[k + 1] : 0) +
                             dense_value(k + 1, static_cast<std::uint32_t>(ka[i] % kBit),
                                         static_cast<std::uint32_t>(kb[j] % kBit));
            }
          const std::int64_t v = min_assignment(c.data(), r, scratch);
          dense[k][a * g + b] = v;
          dense[k][b * g + a] = v;
        }
      });
      dense_from = k;
    }
  }

  std::int64_t raw_distance(std::size_t i, std::size_t j, std::vector<std::vector<std::int64_t>>& tab,
                            std::vector<std::int64_t>& dp) const {
    const PointTree& A = trees[i];
    const PointTree& B = trees[j];
    if (dense_from == 0) return dense_value(0, A.ids[0][0], B.ids[0][0]);
    std::vector<std::int64_t> cost(r * r);
    for (std::size_t k = dense_from; k-- > 0;) {
      const std::size_t la = A.ids[k].size();
      const std::size_t lb = B.ids[k].size();
      const std::size_t lb_next = B.ids[k + 1].size();
      tab[k].resize(la * lb);
      const bool dense_next = k + 1 >= dense_from;
      for (std::size_t a = 0; a < la; ++a) {
        for (std::size_t b = 0; b < lb; ++b) {
          if (A.ids[k][a] == B.ids[k][b]) {
            tab[k][a * lb + b] = 0;
            continue;
          }
          for (std::size_t x = 0; x < r; ++x) {
            const std::uint32_t ca = A.local[k][a * r + x];
            const std::uint8_t ba = A.bit[k][a * r + x];
            for (std::size_t y = 0; y < r; ++y) {
              const std::uint32_t cb = B.local[k][b * r + y];
              const std::int64_t below =
                  dense_next ? dense_value(k + 1, A.ids[k + 1][ca], B.ids[k + 1][cb])
                             : tab[k + 1][ca * lb_next + cb];
              cost[x * r + y] = (ba != B.bit[k][b * r + y] ? weight[k + 1] : 0) + below;
            }
          }
          tab[k][a * lb + b] = min_assignment(cost.data(), r, dp);
        }
      }
    }
    return tab[0][0];
  }

  double normalize(std::int64_t total) const {
    double leaves = 1.0;
    for (std::size_t k = 0; k < n; ++k) leaves *= static_cast<double>(r);
    return static_cast<double>(total) / (leaves * static_cast<double>(mprime));
  }
};

WalkDistanceEngine::WalkDistanceEngine(const GroupSpec& spec, std::size_t n,
                                       std::vector<WalkPoint> points, unsigned threads,
                                       std::uint64_t leaf_cap)
    : impl_(new Impl) {
  Impl& e = *impl_;
  e.spec = spec;
  e.n = n;
  e.r = spec.alphabet_size();
  e.threads = std::max(1u, threads);
  e.points = std::move(points);
  if (e.r > 16) throw SizeError("walk: alphabet above 16 symbols");
  leaf_count(spec, n, leaf_cap);
  if (e.points.empty()) throw StructuralError("walk: no points");
  e.mprime = effective_depth(e.points[0], n);
  for (const auto& p : e.points)
    if (effective_depth(p, n) != e.mprime)
      throw StructuralError("walk: points differ in observation depth");
  e.weight.assign(n + 1, 0);
  std::int64_t below = 1;
  for (std::size_t k = n + 1; k-- > 1;) {
    if (labeled(k, n, e.mprime)) e.weight[k] = below;
    below *= static_cast<std::int64_t>(e.r);
  }
  e.in.r = e.r;
  e.in.table.resize(n + 1);
  e.in.keys.resize(n + 1);

  // Position trees are independent; interning runs in point order so class
  // ids never depend on the worker count.
  std::vector<PositionTree> explored(e.points.size());
  parallel_for(e.points.size(), e.threads,
               [&](std::size_t i, unsigned) { explored[i] = explore(e.points[i], spec, n); });
  e.trees.reserve(e.points.size());
  for (std::size_t i = 0; i < e.points.size(); ++i) {
    e.trees.push_back(intern_tree(explored[i], e.in, n));
    explored[i] = PositionTree{};
  }
  e.build_dense();
}

WalkDistanceEngine::~WalkDistanceEngine() { delete impl_; }

std::size_t WalkDistanceEngine::size() const { return impl_->points.size(); }

double WalkDistanceEngine::distance(std::size_t i, std::size_t j) const {
  return distances({{i, j}}).front();
}

std::vector<double> WalkDistanceEngine::distances(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) const {
  const Impl& e = *impl_;
  for (const auto& [i, j] : pairs)
    if (i >= e.points.size() || j >= e.points.size()) throw StructuralError("walk: no such point");
  std::vector<double> out(pairs.size());
  std::vector<std::vector<std::vector<std::int64_t>>> tabs(e.threads);
  std::vector<std::vector<std::int64_t>> dps(e.threads);
  for (auto& t : tabs) t.resize(e.n + 1);
  parallel_for(pairs.size(), e.threads, [&](std::size_t p, unsigned w) {
    auto [i, j] = pairs[p];
    if (i == j) {
      out[p] = 0.0;
      return;
    }
    // Fixed argument order keeps the value independent of pair orientation.
    if (i > j) std::swap(i, j);
    out[p] = e.normalize(e.raw_distance(i, j, tabs[w], dps[w]));
  });
  return out;
}

SemimetricMatrix WalkDistanceEngine::matrix() const {
  const std::size_t k = size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  const auto values = distances(pairs);
  SemimetricMatrix d(k);
  for (std::size_t p = 0; p < pairs.size(); ++p) d.set(pairs[p].first, pairs[p].second, values[p]);
  return d;
}

TreeLeafSystem leaf_observations(const WalkPoint& p, const GroupSpec& spec, std::size_t n,
                                 std::uint64_t leaf_cap) {
  const std::uint64_t leaves = leaf_count(spec, n, leaf_cap);
  const std::size_t mprime = effective_depth(p, n);
  const PositionTree t = explore(p, spec, n);
  const std::size_t r = spec.alphabet_size();
  TreeLeafSystem sys{std::vector<std::size_t>(n, r), std::vector<std::uint64_t>(leaves, 0),
                     LabelMetric::hamming(static_cast<unsigned>(mprime))};
  for (std::uint64_t leaf = 0; leaf < leaves; ++leaf) {
    // Root branch is the most significant digit.
    std::vector<std::size_t> digits(n);
    std::uint64_t rest = leaf;
    for (std::size_t k = n; k-- > 0;) {
      digits[k] = rest % r;
      rest /= r;
    }
    std::uint32_t q = 0;
    std::uint64_t label = 0;
    for (std::size_t k = 0; k < n; ++k) {
      q = t.child[k][q * r + digits[k]];
      const std::size_t depth = k + 1;
      if (labeled(depth, n, mprime))
        label |= std::uint64_t{t.bits[depth][q]} << (depth + mprime - n - 1);
    }
    sys.labels[leaf] = label;
  }
  return sys;
}

double pair_distance(const WalkPoint& p, const WalkPoint& q, const GroupSpec& spec, std::size_t n,
                     std::uint64_t leaf_cap) {
  WalkDistanceEngine engine(spec, n, {p, q}, 1, leaf_cap);
  return engine.distance(0, 1);
}

namespace {

Estimate wilson(std::size_t hits, std::size_t total) {
  Estimate e;
  e.samples = total;
  if (total == 0) return e;
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(total);
  const double phat = static_cast<double>(hits) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (phat + z * z / (2 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1 - phat) / nn + z * z / (4 * nn * nn)) / denom;
  e.value = phat;
  // The interval always contains phat; the clamps absorb rounding at 0 and 1.
  e.ci_low = hits == 0 ? 0.0 : std::clamp(centre - half, 0.0, phat);
  e.ci_high = hits == total ? 1.0 : std::clamp(centre + half, phat, 1.0);
  return e;
}

Estimate normal_mean(const std::vector<double>& xs) {
  Estimate e;
  e.samples = xs.size();
  if (xs.empty()) return e;
  double s = 0.0;
  for (double x : xs) s += x;
  const double mean = s / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  const double half = 1.959963984540054 * sd / std::sqrt(static_cast<double>(xs.size()));
  e.value = mean;
  e.ci_low = mean - half;
  e.ci_high = mean + half;
  return e;
}

// Leaf-wise mismatches under the identity matching. Both points start from
// the same tail, so equal words reach equal positions.
double identity_matching(const PositionTree& a, const PositionTree& b, std::size_t n,
                         std::size_t r, std::size_t mprime) {
  std::int64_t total = 0;
  std::int64_t below = 1;
  for (std::size_t k = n + 1; k-- > 1;) {
    if (labeled(k, n, mprime))
      for (std::size_t q = 0; q < a.bits[k].size(); ++q)
        if (a.bits[k][q] != b.bits[k][q]) total += static_cast<std::int64_t>(a.paths[k][q]) * below;
    below *= static_cast<std::int64_t>(r);
  }
  return static_cast<double>(total) / (static_cast<double>(below) * static_cast<double>(mprime));
}

}  // namespace

std::vector<std::vector<Estimate>> ball_measure_sweep(const WalkPoint& p, const GroupSpec& spec,
                                                      const std::vector<std::size_t>& depths,
                                                      const std::vector<double>& epsilons,
                                                      std::size_t samples, std::uint64_t seed,
                                                      unsigned threads, std::uint64_t leaf_cap) {
  if (samples < 100) throw DomainError("ball_measure: at least 100 samples required");
  std::vector<std::vector<Estimate>> out;
  for (std::size_t n : depths) {
    std::vector<WalkPoint> pts = {p};
    for (std::size_t i = 0; i < samples; ++i)
      pts.push_back(WalkPoint::sampled(spec, derive_seed(seed, 2, i), p.observation_depth));
    WalkDistanceEngine engine(spec, n, std::move(pts), threads, leaf_cap);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 1; i <= samples; ++i) pairs.emplace_back(0, i);
    const auto d = engine.distances(pairs);
    std::vector<Estimate> row;
    for (double eps : epsilons) {
      std::size_t hits = 0;
      for (double v : d) hits += v < eps;
      row.push_back(wilson(hits, samples));
    }
    out.push_back(std::move(row));
  }
  return out;
}

Estimate ball_measure_estimate(const WalkPoint& p, const GroupSpec& spec, std::size_t n,
                               double epsilon, std::size_t samples, std::uint64_t seed,
                               unsigned threads, std::uint64_t leaf_cap) {
  return ball_measure_sweep(p, spec, {n}, {epsilon}, samples, seed, threads, leaf_cap)[0][0];
}

std::vector<DistanceProfileRow> mean_distance_profile(const GroupSpec& spec, std::size_t n_max,
                                                      std::size_t m, std::size_t pairs,
                                                      std::uint64_t seed, unsigned threads,
                                                      std::uint64_t leaf_cap) {
  if (pairs < 2) throw DomainError("profile: at least two pairs required");
  std::vector<WalkPoint> pts;
  for (std::size_t k = 0; k < 2 * pairs; ++k)
    pts.push_back(WalkPoint::sampled(spec, derive_seed(seed, 1, k), m));
  std::vector<DistanceProfileRow> rows;
  for (std::size_t n = 1; n <= n_max; ++n) {
    WalkDistanceEngine engine(spec, n, pts, threads, leaf_cap);
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (std::size_t k = 0; k < pairs; ++k) idx.emplace_back(2 * k, 2 * k + 1);
    const auto d = engine.distances(idx);
    std::vector<double> ident(pairs);
    const std::size_t mprime = std::min(m, n);
    parallel_for(pairs, threads, [&](std::size_t k, unsigned) {
      ident[k] = identity_matching(explore(pts[2 * k], spec, n), explore(pts[2 * k + 1], spec, n), n,
                                   spec.alphabet_size(), mprime);
    });
    rows.push_back({n, normal_mean(d), normal_mean(ident)});
  }
  return rows;
}

std::vector<WalkPoint> sample_points(const GroupSpec& spec, std::size_t count, std::size_t m,
                                     std::uint64_t seed) {
  std::vector<WalkPoint> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    pts.push_back(WalkPoint::sampled(spec, derive_seed(seed, 3, i), m));
  return pts;
}

}  // namespace filtlab
