#pragma once

// Z^d, the free group F_s and the discrete Heisenberg group, with unique
// normal forms, word norms, counter-based increment streams and a lazily
// evaluated Bernoulli scenery.
//
// Walk alphabet: symbol 2i is generator g_i, symbol 2i+1 is its inverse.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace filtlab {

enum class GroupKind { lattice, free, heisenberg };

struct GroupSpec {
  GroupKind kind = GroupKind::lattice;
  std::size_t rank = 1;  // d for Z^d, s for F_s, 2 for Heisenberg

  static GroupSpec lattice(std::size_t d);
  static GroupSpec free_group(std::size_t s);
  static GroupSpec heisenberg();
  // "Z1", "Z2", "F2", "H" ...; throws StructuralError on anything else.
  static GroupSpec parse(const std::string& name);
  std::string name() const;

  std::size_t generator_count() const { return rank; }
  std::size_t alphabet_size() const { return 2 * rank; }

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

struct GroupElement {
  GroupSpec spec;
  // lattice: coordinates; heisenberg: (a, b, c); free: reduced word as
  // walk symbols.
  std::vector<std::int64_t> data;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

GroupElement identity(const GroupSpec& spec);
GroupElement generator(const GroupSpec& spec, std::uint32_t symbol);
GroupElement multiply(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& a);
// a followed by the walk symbols, i.e. a * g_{w_1} * ... * g_{w_k}.
GroupElement apply_word(GroupElement a, std::span<const std::uint32_t> word);

struct NormBounds {
  std::uint64_t lower = 0;
  std::uint64_t upper = 0;
  bool exact() const { return lower == upper; }
};

inline constexpr std::uint64_t kHeisenbergBallRadius = 20;

// Word length over the symmetric generating set. Exact for Z^d and F_s and
// for Heisenberg elements within the radius-20 ball; certified bracket
// outside it.
NormBounds word_norm_bounds(const GroupElement& a);
// Uncertified-radius bracket for the Heisenberg element (a, b, c): the
// lower bound is max(|a|+|b|, 2 sqrt|c|), the upper bound the length of an
// explicit word.
NormBounds heisenberg_norm_bracket(std::int64_t a, std::int64_t b, std::int64_t c);
// Exact norm; throws UnsupportedError when only a bracket is available.
std::uint64_t word_norm(const GroupElement& a);

// d = sum i (n_i - n_{i-1}) over the lower central series. Z^d -> d,
// Heisenberg -> 4; the free group has no polynomial regime.
std::size_t weighted_rank(const GroupSpec& spec);

// Stateless mixing used for every stream in the library.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);
// Independent child seed for (seed, stream, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Uniform symbol in [0, 2s) at time t of the given stream.
std::uint32_t increment_at(const GroupSpec& spec, std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t t);
std::vector<std::uint32_t> sample_increments(const GroupSpec& spec, std::size_t n,
                                             std::uint64_t seed, std::uint64_t stream = 0);
std::string symbols_to_string(const GroupSpec& spec, std::span<const std::uint32_t> symbols);

// Fair-bit configuration on G as a keyed pseudorandom function of normal
// forms. With a translation h the scenery is the left shift (h.f)(x) =
// f(h^-1 x); `constant` forces every bit to 0 (test hook).
class Scenery {
 public:
  explicit Scenery(std::uint64_t seed) : seed_(seed) {}
  static Scenery constant_zero();

  Scenery translated(const GroupElement& h) const;
  int bit(const GroupElement& g) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  bool constant_ = false;
  std::optional<GroupElement> shift_inverse_;
};

// Smallest n in [h, h^5] (and within both sequences) with
// upper_norm(u_1...u_n)/sqrt(n) < c and the same for v, where upper_norm is
// the exact norm or, beyond the certified ball, its upper bound.
std::optional<std::size_t> meeting_diagnostic(const GroupSpec& spec,
                                              std::span<const std::uint32_t> u,
                                              std::span<const std::uint32_t> v, std::size_t h,
                                              double c);

}  // namespace filtlab

template <>
struct std::hash<filtlab::GroupElement> {
  std::size_t operator()(const filtlab::GroupElement& g) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(g.spec.kind) * 0x9e3779b97f4a7c15ULL;
    for (auto v : g.data) h = filtlab::hash_combine(h, static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};
