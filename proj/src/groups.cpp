#include "filtlab/groups.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <unordered_map>

#include "filtlab/errors.hpp"

namespace filtlab {

GroupSpec GroupSpec::lattice(std::size_t d) {
  if (d == 0) throw StructuralError("lattice rank must be positive");
  return {GroupKind::lattice, d};
}

GroupSpec GroupSpec::free_group(std::size_t s) {
  if (s == 0) throw StructuralError("free group needs at least one generator");
  return {GroupKind::free, s};
}

GroupSpec GroupSpec::heisenberg() { return {GroupKind::heisenberg, 2}; }

GroupSpec GroupSpec::parse(const std::string& name) {
  auto rank_of = [&](std::size_t from) -> std::size_t {
    if (name.size() <= from) throw StructuralError("group: missing rank in \"" + name + "\"");
    std::size_t r = 0;
    for (std::size_t i = from; i < name.size(); ++i) {
      if (name[i] < '0' || name[i] > '9') throw StructuralError("group: bad name \"" + name + "\"");
      r = r * 10 + static_cast<std::size_t>(name[i] - '0');
      if (r > 64) throw StructuralError("group: rank too large in \"" + name + "\"");
    }
    return r;
  };
  if (name == "H" || name == "H3" || name == "heisenberg") return heisenberg();
  if (!name.empty() && name[0] == 'Z') return lattice(rank_of(1));
  if (!name.empty() && name[0] == 'F') return free_group(rank_of(1));
  throw StructuralError("group: unknown group \"" + name + "\"");
}

std::string GroupSpec::name() const {
  switch (kind) {
    case GroupKind::lattice: return "Z" + std::to_string(rank);
    case GroupKind::free: return "F" + std::to_string(rank);
    case GroupKind::heisenberg: return "H3";
  }
  return "?";
}

namespace {

void same_spec(const GroupElement& a, const GroupElement& b) {
  if (!(a.spec == b.spec)) throw StructuralError("group: elements of different groups");
}

std::int64_t checked(std::int64_t v) {
  constexpr std::int64_t kLimit = std::int64_t{1} << 40;
  if (v > kLimit || v < -kLimit) throw DomainError("group: coordinate overflow");
  return v;
}

}  // namespace

GroupElement identity(const GroupSpec& spec) {
  switch (spec.kind) {
    case GroupKind::lattice: return {spec, std::vector<std::int64_t>(spec.rank, 0)};
    case GroupKind::free: return {spec, {}};
    case GroupKind::heisenberg: return {spec, {0, 0, 0}};
  }
  return {spec, {}};
}

GroupElement generator(const GroupSpec& spec, std::uint32_t symbol) {
  if (symbol >= spec.alphabet_size()) throw StructuralError("group: symbol out of range");
  GroupElement g = identity(spec);
  const std::size_t i = symbol / 2;
  const std::int64_t sign = (symbol % 2) ? -1 : 1;
  switch (spec.kind) {
    case GroupKind::lattice: g.data[i] = sign; break;
    case GroupKind::free: g.data.push_back(symbol); break;
    case GroupKind::heisenberg: g.data[i] = sign; break;
  }
  return g;
}

GroupElement multiply(const GroupElement& a, const GroupElement& b) {
  same_spec(a, b);
  GroupElement out = a;
  switch (a.spec.kind) {
    case GroupKind::lattice:
      for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = checked(a.data[i] + b.data[i]);
      break;
    case GroupKind::free:
      for (auto s : b.data) {
        if (!out.data.empty() && (out.data.back() ^ 1) == s)
          out.data.pop_back();
        else
          out.data.push_back(s);
      }
      break;
    case GroupKind::heisenberg:
      // (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')
      out.data[0] = checked(a.data[0] + b.data[0]);
      out.data[1] = checked(a.data[1] + b.data[1]);
      out.data[2] = checked(a.data[2] + b.data[2] + a.data[0] * b.data[1]);
      break;
  }
  return out;
}

GroupElement inverse(const GroupElement& a) {
  GroupElement out = a;
  switch (a.spec.kind) {
    case GroupKind::lattice:
      for (auto& v : out.data) v = -v;
      break;
    case GroupKind::free:
      std::reverse(out.data.begin(), out.data.end());
      for (auto& s : out.data) s ^= 1;
      break;
    case GroupKind::heisenberg:
      out.data = {-a.data[0], -a.data[1], checked(-a.data[2] + a.data[0] * a.data[1])};
      break;
  }
  return out;
}

GroupElement apply_word(GroupElement a, std::span<const std::uint32_t> word) {
  for (auto s : word) {
    if (s >= a.spec.alphabet_size()) throw StructuralError("group: symbol out of range");
    const std::size_t i = s / 2;
    const std::int64_t sign = (s % 2) ? -1 : 1;
    switch (a.spec.kind) {
      case GroupKind::lattice: a.data[i] += sign; break;
      case GroupKind::free:
        if (!a.data.empty() && (a.data.back() ^ 1) == s)
          a.data.pop_back();
        else
          a.data.push_back(s);
        break;
      case GroupKind::heisenberg:
        if (i == 0) {
          a.data[0] += sign;
        } else {
          a.data[1] += sign;
          a.data[2] += a.data[0] * sign;
        }
        break;
    }
  }
  return a;
}

namespace {

struct Triple {
  std::int64_t a, b, c;
  bool operator==(const Triple&) const = default;
};
struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    return hash_combine(hash_combine(mix64(static_cast<std::uint64_t>(t.a)),
                                     static_cast<std::uint64_t>(t.b)),
                        static_cast<std::uint64_t>(t.c));
  }
};

// Breadth-first ball of the Heisenberg Cayley graph, built once.
const std::unordered_map<Triple, std::uint8_t, TripleHash>& heisenberg_ball() {
  static std::unordered_map<Triple, std::uint8_t, TripleHash> ball;
  static std::once_flag once;
  std::call_once(once, [] {
    std::vector<Triple> frontier = {{0, 0, 0}};
    ball.emplace(Triple{0, 0, 0}, 0);
    for (std::uint64_t r = 1; r <= kHeisenbergBallRadius; ++r) {
      std::vector<Triple> next;
      for (const Triple& t : frontier) {
        const Triple nbrs[4] = {{t.a + 1, t.b, t.c},
                                {t.a - 1, t.b, t.c},
                                {t.a, t.b + 1, t.c + t.a},
                                {t.a, t.b - 1, t.c - t.a}};
        for (const Triple& u : nbrs)
          if (ball.emplace(u, static_cast<std::uint8_t>(r)).second) next.push_back(u);
      }
      frontier = std::move(next);
    }
  });
  return ball;
}

std::uint64_t isqrt_ceil(std::uint64_t v) {
  auto s = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(v)));
  while (s * s > v) --s;
  while (s * s < v) ++s;
  return s;
}

// Length of a word representing the central element z^c, z = [x, y].
std::uint64_t central_cost(std::uint64_t c) {
  if (c == 0) return 0;
  // [x^p, y^q] = z^(pq) costs 2(p+q); the remainder uses [x^rem, y].
  const std::uint64_t p = isqrt_ceil(c);
  const std::uint64_t q = c / p;
  const std::uint64_t rem = c - p * q;
  return 2 * (p + q) + (rem ? 2 * (rem + 1) : 0);
}

}  // namespace

NormBounds heisenberg_norm_bracket(std::int64_t a, std::int64_t b, std::int64_t c) {
  const auto ab = static_cast<std::uint64_t>(std::llabs(a) + std::llabs(b));
  const auto cabs = static_cast<std::uint64_t>(std::llabs(c));
  // A word of length L has |c| <= L^2 / 4, so L >= 2 sqrt|c|.
  const std::uint64_t lower = std::max<std::uint64_t>(ab, isqrt_ceil(4 * cabs));
  // x^a y^b = (a, b, ab) and y^b x^a = (a, b, 0); then fix the center.
  const std::uint64_t via_xy = ab + central_cost(static_cast<std::uint64_t>(std::llabs(c - a * b)));
  const std::uint64_t via_yx = ab + central_cost(cabs);
  return {lower, std::min(via_xy, via_yx)};
}

NormBounds word_norm_bounds(const GroupElement& g) {
  switch (g.spec.kind) {
    case GroupKind::lattice: {
      std::uint64_t s = 0;
      for (auto v : g.data) s += static_cast<std::uint64_t>(std::llabs(v));
      return {s, s};
    }
    case GroupKind::free: return {g.data.size(), g.data.size()};
    case GroupKind::heisenberg: {
      const Triple t{g.data[0], g.data[1], g.data[2]};
      const auto& ball = heisenberg_ball();
      if (auto it = ball.find(t); it != ball.end()) return {it->second, it->second};
      NormBounds b = heisenberg_norm_bracket(t.a, t.b, t.c);
      b.lower = std::max(b.lower, kHeisenbergBallRadius + 1);
      b.upper = std::max(b.upper, b.lower);
      return b;
    }
  }
  return {};
}

std::uint64_t word_norm(const GroupElement& a) {
  const NormBounds b = word_norm_bounds(a);
  if (!b.exact()) throw UnsupportedError("word_norm: only a bracket is certified for this element");
  return b.lower;
}

std::size_t weighted_rank(const GroupSpec& spec) {
  switch (spec.kind) {
    case GroupKind::lattice: return spec.rank;
    case GroupKind::heisenberg: return 1 * (2 - 0) + 2 * (3 - 2);
    case GroupKind::free: break;
  }
  throw UnsupportedError("weighted_rank: the free group is not nilpotent");
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return hash_combine(hash_combine(mix64(seed), stream), index);
}

std::uint32_t increment_at(const GroupSpec& spec, std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t t) {
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(derive_seed(seed, stream, t)) * spec.alphabet_size();
  return static_cast<std::uint32_t>(wide >> 64);
}

std::vector<std::uint32_t> sample_increments(const GroupSpec& spec, std::size_t n,
                                             std::uint64_t seed, std::uint64_t stream) {
  std::vector<std::uint32_t> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = increment_at(spec, seed, stream, t);
  return out;
}

std::string symbols_to_string(const GroupSpec& spec, std::span<const std::uint32_t> symbols) {
  std::string s;
  for (auto sym : symbols) {
    if (sym >= spec.alphabet_size()) throw StructuralError("group: symbol out of range");
    // a, b, c, ... for generators; upper case for inverses.
    const char base = static_cast<char>('a' + sym / 2);
    s.push_back(sym % 2 ? static_cast<char>(base - 'a' + 'A') : base);
  }
  return s;
}

Scenery Scenery::constant_zero() {
  Scenery s(0);
  s.constant_ = true;
  return s;
}

Scenery Scenery::translated(const GroupElement& h) const {
  Scenery s = *this;
  const GroupElement hinv = inverse(h);
  s.shift_inverse_ = shift_inverse_ ? multiply(*shift_inverse_, hinv) : hinv;
  return s;
}

int Scenery::bit(const GroupElement& g) const {
  if (constant_) return 0;
  const GroupElement& x = shift_inverse_ ? multiply(*shift_inverse_, g) : g;
  std::uint64_t h = hash_combine(seed_, static_cast<std::uint64_t>(x.spec.kind) + 1);
  h = hash_combine(h, x.data.size());
  for (auto v : x.data) h = hash_combine(h, static_cast<std::uint64_t>(v));
  return static_cast<int>(h >> 63);
}

std::optional<std::size_t> meeting_diagnostic(const GroupSpec& spec,
                                              std::span<const std::uint32_t> u,
                                              std::span<const std::uint32_t> v, std::size_t h,
                                              double c) {
  if (h == 0) throw DomainError("meeting_diagnostic: h must be positive");
  double hi = 1.0;
  for (int i = 0; i < 5; ++i) hi *= static_cast<double>(h);
  const std::size_t last = static_cast<std::size_t>(
      std::min<double>(hi, static_cast<double>(std::min(u.size(), v.size()))));
  GroupElement pu = identity(spec);
  GroupElement pv = identity(spec);
  for (std::size_t n = 1; n <= last; ++n) {
    pu = apply_word(std::move(pu), u.subspan(n - 1, 1));
    pv = apply_word(std::move(pv), v.subspan(n - 1, 1));
    if (n < h) continue;
    const double root = std::sqrt(static_cast<double>(n));
    const double nu = static_cast<double>(word_norm_bounds(pu).upper) / root;
    const double nv = static_cast<double>(word_norm_bounds(pv).upper) / root;
    if (nu < c && nv < c) return n;
  }
  return std::nullopt;
}

}  // namespace filtlab
