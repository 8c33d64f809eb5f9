#include "filtlab/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "filtlab/errors.hpp"
#include "filtlab/parallel.hpp"
#include "filtlab/treewalk.hpp"
#include "filtlab/walksim.hpp"

namespace filtlab {

namespace {

HTable arrange(const EntropyTable& t, bool upper) {
  HTable h;
  for (const auto& c : t.cells) {
    if (std::find(h.ns.begin(), h.ns.end(), c.n) == h.ns.end()) h.ns.push_back(c.n);
    if (std::find(h.epsilons.begin(), h.epsilons.end(), c.epsilon) == h.epsilons.end())
      h.epsilons.push_back(c.epsilon);
  }
  h.H.assign(h.epsilons.size(), std::vector<double>(h.ns.size(), 0.0));
  for (const auto& c : t.cells) {
    const auto e = std::find(h.epsilons.begin(), h.epsilons.end(), c.epsilon) - h.epsilons.begin();
    const auto i = std::find(h.ns.begin(), h.ns.end(), c.n) - h.ns.begin();
    h.H[e][i] = upper ? c.upper : c.lower;
  }
  return h;
}

}  // namespace

HTable EntropyTable::upper_table() const { return arrange(*this, true); }
HTable EntropyTable::lower_table() const { return arrange(*this, false); }

std::vector<double> EntropyTable::upper_at(double epsilon) const {
  std::vector<double> out;
  for (const auto& c : cells)
    if (c.epsilon == epsilon) out.push_back(c.upper);
  return out;
}

std::vector<std::size_t> EntropyTable::ns() const { return arrange(*this, true).ns; }

SemimetricMatrix walk_distance_matrix(const WalkSample& s, std::size_t n, unsigned threads) {
  WalkDistanceEngine engine(s.group, n, sample_points(s.group, s.points, s.m, s.seed), threads,
                            s.leaf_cap);
  return engine.matrix();
}

EntropyTable walk_entropy_table(const std::vector<std::size_t>& ns,
                                const std::vector<double>& epsilons, const MatrixSource& source,
                                unsigned threads, const EntropyOptions& opt) {
  if (ns.empty() || epsilons.empty()) throw StructuralError("entropy table: empty grid");
  EntropyTable t;
  std::vector<SemimetricMatrix> mats;
  for (std::size_t n : ns) mats.push_back(source(n));
  std::vector<std::vector<EntropyBounds>> rows(ns.size());
  parallel_for(ns.size(), threads, [&](std::size_t i, unsigned) {
    rows[i] = epsilon_entropy_profile(mats[i], DiscreteMeasure::uniform(mats[i].size()), epsilons, opt);
  });
  for (std::size_t i = 0; i < ns.size(); ++i)
    for (std::size_t e = 0; e < epsilons.size(); ++e)
      t.cells.push_back({ns[i], epsilons[e], rows[i][e].lower, rows[i][e].upper, rows[i][e].upper_method});
  return t;
}

OrbitEntropyResult orbit_entropy_experiment(std::size_t n_max, std::size_t r,
                                            const std::vector<double>& letter_law,
                                            const std::vector<double>& epsilons, unsigned threads) {
  if (n_max == 0) throw StructuralError("orbit entropy: n_max must be positive");
  const std::size_t k = letter_law.size();
  if (k < 2) throw StructuralError("orbit entropy: need at least two letters");
  const LabelMetric base = LabelMetric::matrix(SemimetricMatrix::discrete(k));
  OrbitEntropyResult out;
  std::vector<double> entropies;
  std::vector<std::size_t> radices;
  std::vector<SemimetricMatrix> spaces;
  std::vector<DiscreteMeasure> masses;
  std::size_t leaves = 1;
  for (std::size_t n = 1; n <= n_max; ++n) {
    leaves *= r;
    const DiscreteMeasure words = iid_word_measure(letter_law, leaves);
    const OrbitPartition orb = orbit_partition(n, r, k, words);
    out.rows.push_back({n, orb.orbit_count, orb.entropy, 0.0});
    entropies.push_back(orb.entropy);
    radices.push_back(r);

    std::vector<TreeLeafSystem> reps;
    for (std::uint64_t w : orb.representatives)
      reps.push_back(TreeLeafSystem::homogeneous(r, n, word_labels(w, k, leaves), base));
    const std::size_t q = reps.size();
    SemimetricMatrix d(q);
    std::vector<std::vector<double>> row(q);
    parallel_for(q, threads, [&](std::size_t i, unsigned) {
      row[i].resize(q, 0.0);
      for (std::size_t j = i + 1; j < q; ++j) row[i][j] = tree_distance(reps[i], reps[j]);
    });
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = i + 1; j < q; ++j) d.set(i, j, row[i][j]);
    std::vector<double> w(q, 0.0);
    for (std::size_t x = 0; x < words.size(); ++x) w[orb.gamma.block_of(x)] += words[x];
    spaces.push_back(std::move(d));
    masses.emplace_back(std::move(w));
  }
  const ExponentialEntropy ee = exponential_entropy_estimate(entropies, radices);
  for (std::size_t i = 0; i < out.rows.size(); ++i) out.rows[i].h = ee.h[i];
  out.nonincreasing = ee.nonincreasing;
  if (!epsilons.empty()) {
    std::vector<std::vector<EntropyBounds>> rows(n_max);
    parallel_for(n_max, threads, [&](std::size_t i, unsigned) {
      rows[i] = epsilon_entropy_profile(spaces[i], masses[i], epsilons);
    });
    for (std::size_t i = 0; i < n_max; ++i)
      for (std::size_t e = 0; e < epsilons.size(); ++e)
        out.table.cells.push_back(
            {i + 1, epsilons[e], rows[i][e].lower, rows[i][e].upper, rows[i][e].upper_method});
  }
  return out;
}

}  // namespace filtlab
