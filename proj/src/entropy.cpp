#include "filtlab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "filtlab/transport.hpp"

namespace filtlab {

namespace {

double h2(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -t * std::log2(t) - (1 - t) * std::log2(1 - t);
}

// Mass flows x -> y; lambda is the image measure.
struct Flow {
  std::size_t from;
  std::size_t to;
  double mass;
};

// Atoms in an order fixed by intrinsic data (mass, then sorted distance
// row), so every heuristic below is invariant under isometric,
// measure-preserving relabelings.
class Workspace {
 public:
  Workspace(const SemimetricMatrix& d, const DiscreteMeasure& mu) : n_(mu.size()) {
    if (d.size() != mu.size()) throw StructuralError("entropy: space and measure differ in size");
    std::vector<std::vector<double>> rows(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      rows[i].assign(d.row(i).begin(), d.row(i).end());
      std::sort(rows[i].begin(), rows[i].end());
    }
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      if (mu[a] != mu[b]) return mu[a] > mu[b];
      return rows[a] < rows[b];
    });
    d_.resize(n_ * n_);
    m_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      m_[i] = mu[order_[i]];
      for (std::size_t j = 0; j < n_; ++j) d_[i * n_ + j] = d(order_[i], order_[j]);
    }
    for (std::size_t i = 0; i < n_; ++i)
      if (m_[i] > 0.0) sources_.push_back(i);
    entropy_mu_ = entropy_bits(m_);
    build_merge_path();
  }

  double dist(std::size_t a, std::size_t b) const { return d_[a * n_ + b]; }

  EntropyBounds bounds(double eps, const EntropyOptions& opt) const {
    if (!(eps > 0.0)) throw DomainError("entropy: eps must be positive");
    EntropyBounds b;
    upper(eps, b);
    b.lower = lower(eps, opt);
    if (b.lower > b.upper) {
      b.lower = b.upper;
      b.lower_clamped = true;
    }
    return b;
  }

 private:
  // ---- upper bound -------------------------------------------------------

  std::vector<Flow> flows_of(const std::vector<std::size_t>& assign) const {
    std::vector<Flow> f;
    for (std::size_t x : sources_) f.push_back({x, assign[x], m_[x]});
    return f;
  }

  double cost_of(const std::vector<Flow>& flows) const {
    double c = 0.0;
    for (const Flow& f : flows) c += f.mass * dist(f.from, f.to);
    return c;
  }

  std::vector<double> image(const std::vector<Flow>& flows) const {
    std::vector<double> lam(n_, 0.0);
    for (const Flow& f : flows) lam[f.to] += f.mass;
    return lam;
  }

  // Spend the leftover budget moving mass from the lightest cluster to the
  // heavier cluster with the best entropy decrease per unit cost.
  void refine(std::vector<Flow>& flows, double budget) const {
    for (int guard = 0; guard < static_cast<int>(4 * n_ + 16) && budget > 0.0; ++guard) {
      std::vector<double> lam = image(flows);
      std::size_t s = n_;
      for (std::size_t y = 0; y < n_; ++y)
        if (lam[y] > 0.0 && (s == n_ || lam[y] < lam[s])) s = y;
      if (s == n_) return;
      double best_ratio = 0.0;
      std::size_t best_flow = flows.size();
      std::size_t best_target = n_;
      for (std::size_t k = 0; k < flows.size(); ++k) {
        const Flow& f = flows[k];
        if (f.to != s || f.mass <= 0.0) continue;
        for (std::size_t t = 0; t < n_; ++t) {
          if (t == s || !(lam[t] > lam[s])) continue;
          const double unit = std::max(dist(f.from, t) - dist(f.from, s), 0.0);
          const double gain = std::log2(lam[t] / lam[s]);
          const double ratio = unit > 0.0 ? gain / unit : std::numeric_limits<double>::infinity();
          if (ratio > best_ratio) {
            best_ratio = ratio;
            best_flow = k;
            best_target = t;
          }
        }
      }
      if (best_flow == flows.size()) return;
      Flow& f = flows[best_flow];
      const double unit = std::max(dist(f.from, best_target) - dist(f.from, s), 0.0);
      double delta = f.mass;
      if (unit > 0.0) delta = std::min(delta, budget / unit);
      if (!(delta > 0.0)) return;
      f.mass -= delta;
      budget -= delta * unit;
      flows.push_back({f.from, best_target, delta});
    }
  }

  void consider(const std::vector<Flow>& base, double eps, const char* method,
                std::vector<std::pair<double, std::pair<std::vector<Flow>, std::string>>>& pool) const {
    const double limit = eps * (1.0 - kStrictMargin);
    const double c = cost_of(base);
    if (!(c <= limit)) return;
    std::vector<Flow> refined = base;
    // Leave room for the rounding of lambda's weights, which the exact
    // verification sees.
    refine(refined, limit - c - (1e-9 * eps + 1e-15));
    pool.push_back({entropy_bits(image(refined)), {std::move(refined), method}});
    pool.push_back({entropy_bits(image(base)), {base, method}});
  }

  void upper(double eps, EntropyBounds& out) const {
    std::vector<std::pair<double, std::pair<std::vector<Flow>, std::string>>> pool;
    std::vector<std::size_t> assign(n_);
    std::iota(assign.begin(), assign.end(), 0);
    consider(flows_of(assign), eps, "identity", pool);

    // Best single atom.
    std::size_t z = 0;
    double zc = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < n_; ++y) {
      double c = 0.0;
      for (std::size_t x : sources_) c += m_[x] * dist(x, y);
      if (c < zc) {
        zc = c;
        z = y;
      }
    }
    consider(flows_of(std::vector<std::size_t>(n_, z)), eps, "single-atom", pool);

    // Longest feasible prefix of the greedy merge path.
    const double limit = eps * (1.0 - kStrictMargin);
    std::size_t steps = 0;
    while (steps < merge_cost_.size() && merge_cost_[steps] <= limit) ++steps;
    if (steps > 0) consider(flows_of(merge_assign(steps)), eps, "greedy-merge", pool);

    // Voronoi cells of eps-nets at several radii.
    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0}) {
      auto cells = voronoi(separated_centers(f * eps));
      consider(flows_of(medoids(cells)), eps, "eps-net", pool);
    }

    std::stable_sort(pool.begin(), pool.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [h, cand] : pool) {
      std::vector<double> lam = image(cand.first);
      // Renormalize away summation drift before handing lambda to the solver.
      const double total = order_invariant_sum(lam);
      for (double& v : lam) v /= total;
      const double k = solve_transport(lam, m_, d_).value;
      if (k <= limit) {
        out.upper = std::min(h, entropy_mu_);
        out.upper_method = cand.second;
        out.witness.assign(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) out.witness[order_[i]] = lam[i];
        return;
      }
    }
    out.upper = entropy_mu_;
    out.upper_method = "identity";
    out.witness.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) out.witness[order_[i]] = m_[i];
  }

  // Agglomerative merging: always merge the pair of clusters whose union
  // (represented by one of the two current representatives) adds the least
  // transport cost, then move the representative to the best atom.
  void build_merge_path() {
    const std::size_t k = sources_.size();
    if (k <= 1) return;
    // row[c][y] = sum over x in cluster c of m_x d(x, y)
    std::vector<std::vector<double>> row(k, std::vector<double>(n_));
    std::vector<std::size_t> rep(k);
    std::vector<double> cost(k, 0.0);
    std::vector<char> alive(k, 1);
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t x = sources_[c];
      for (std::size_t y = 0; y < n_; ++y) row[c][y] = m_[x] * dist(x, y);
      rep[c] = x;
    }
    double total = 0.0;
    for (std::size_t step = 0; step + 1 < k; ++step) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t ba = k, bb = k;
      for (std::size_t a = 0; a < k; ++a) {
        if (!alive[a]) continue;
        for (std::size_t b = a + 1; b < k; ++b) {
          if (!alive[b]) continue;
          const double via_a = row[b][rep[a]] - cost[b];
          const double via_b = row[a][rep[b]] - cost[a];
          const double delta = std::min(via_a, via_b);
          if (delta < best) {
            best = delta;
            ba = a;
            bb = b;
          }
        }
      }
      for (std::size_t y = 0; y < n_; ++y) row[ba][y] += row[bb][y];
      alive[bb] = 0;
      std::size_t r = 0;
      for (std::size_t y = 1; y < n_; ++y)
        if (row[ba][y] < row[ba][r]) r = y;
      total += row[ba][r] - cost[ba] - cost[bb];
      cost[ba] = row[ba][r];
      rep[ba] = r;
      merges_.push_back({ba, bb, r});
      merge_cost_.push_back(total);
    }
  }

  std::vector<std::size_t> merge_assign(std::size_t steps) const {
    const std::size_t k = sources_.size();
    std::vector<std::size_t> parent(k);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::size_t> rep(sources_);
    for (std::size_t s = 0; s < steps; ++s) {
      const auto& mg = merges_[s];
      for (std::size_t c = 0; c < k; ++c)
        if (parent[c] == mg.b) parent[c] = mg.a;
      rep[mg.a] = mg.rep;
    }
    std::vector<std::size_t> assign(n_);
    std::iota(assign.begin(), assign.end(), 0);
    for (std::size_t c = 0; c < k; ++c) assign[sources_[c]] = rep[parent[c]];
    return assign;
  }

  // Greedy centers, heaviest atoms first, pairwise farther apart than r.
  std::vector<std::size_t> separated_centers(double r) const {
    std::vector<std::size_t> centers;
    for (std::size_t x : sources_) {
      bool far = true;
      for (std::size_t c : centers)
        if (dist(x, c) <= r) {
          far = false;
          break;
        }
      if (far) centers.push_back(x);
    }
    return centers;
  }

  // cell[x] = index of the nearest center (first one on ties), for all atoms.
  std::vector<std::size_t> voronoi(const std::vector<std::size_t>& centers) const {
    std::vector<std::size_t> cell(n_, 0);
    for (std::size_t x = 0; x < n_; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centers.size(); ++c) {
        if (dist(x, centers[c]) < best) {
          best = dist(x, centers[c]);
          cell[x] = c;
        }
      }
    }
    return cell;
  }

  // Every source atom goes to the 1-median of its cell.
  std::vector<std::size_t> medoids(const std::vector<std::size_t>& cell) const {
    const std::size_t cells = *std::max_element(cell.begin(), cell.end()) + 1;
    std::vector<std::size_t> rep(cells, n_);
    std::vector<double> best(cells, std::numeric_limits<double>::infinity());
    for (std::size_t y = 0; y < n_; ++y) {
      const std::size_t c = cell[y];
      double s = 0.0;
      for (std::size_t x : sources_)
        if (cell[x] == c) s += m_[x] * dist(x, y);
      if (s < best[c]) {
        best[c] = s;
        rep[c] = y;
      }
    }
    std::vector<std::size_t> assign(n_);
    for (std::size_t x = 0; x < n_; ++x) assign[x] = rep[cell[x]];
    return assign;
  }

  // ---- lower bound -------------------------------------------------------

  // For a partition of the atoms into cells: any lambda within eps moves at
  // most tau mass across cells, so its cell law is within total variation
  // tau of mu's and the entropy continuity bound applies.
  double partition_bound(const std::vector<std::size_t>& cell, double eps) const {
    const std::size_t cells = *std::max_element(cell.begin(), cell.end()) + 1;
    std::vector<double> p(cells, 0.0);
    for (std::size_t x : sources_) p[cell[x]] += m_[x];
    std::size_t k = 0;
    for (double v : p) k += v > 0.0;
    const double hp = entropy_bits(p);
    if (k <= 1) return hp;
    // Cheapest way out of the cell for each unit of mass at x.
    std::vector<std::pair<double, double>> exits;  // (cost per unit, mass)
    for (std::size_t x : sources_) {
      double c = std::numeric_limits<double>::infinity();
      for (std::size_t y = 0; y < n_; ++y)
        if (cell[y] != cell[x]) c = std::min(c, dist(x, y));
      exits.push_back({c, m_[x]});
    }
    std::sort(exits.begin(), exits.end());
    double tau = 0.0;
    double budget = eps;
    for (const auto& [c, mass] : exits) {
      if (c <= 0.0) {
        tau += mass;
        continue;
      }
      const double take = std::min(mass, budget / c);
      tau += take;
      budget -= take * c;
      if (take < mass) break;
    }
    tau = std::min(tau, 1.0);
    const double kk = static_cast<double>(k);
    if (tau > 1.0 - 1.0 / kk) return 0.0;
    return hp - tau * std::log2(kk - 1.0) - h2(tau);
  }

  double lower(double eps, const EntropyOptions& opt) const {
    std::vector<std::size_t> singletons(n_);
    std::iota(singletons.begin(), singletons.end(), 0);
    double best = partition_bound(singletons, eps);
    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const auto centers = separated_centers(2.0 * opt.theta * eps * f);
      if (centers.empty()) continue;
      best = std::max(best, partition_bound(voronoi(centers), eps));
    }
    return std::max(best, 0.0);
  }

  struct Merge {
    std::size_t a, b, rep;
  };

  std::size_t n_;
  std::vector<std::size_t> order_;
  std::vector<double> d_;
  std::vector<double> m_;
  std::vector<std::size_t> sources_;
  double entropy_mu_ = 0.0;
  std::vector<Merge> merges_;
  std::vector<double> merge_cost_;
};

}  // namespace

EntropyBounds epsilon_entropy_bounds(const SemimetricMatrix& d, const DiscreteMeasure& mu,
                                     double eps, const EntropyOptions& opt) {
  if (!(eps > 0.0)) throw DomainError("entropy: eps must be positive");
  return Workspace(d, mu).bounds(eps, opt);
}

std::vector<EntropyBounds> epsilon_entropy_profile(const SemimetricMatrix& d,
                                                   const DiscreteMeasure& mu,
                                                   const std::vector<double>& eps,
                                                   const EntropyOptions& opt) {
  for (double e : eps)
    if (!(e > 0.0)) throw DomainError("entropy: eps must be positive");
  Workspace ws(d, mu);
  std::vector<EntropyBounds> out;
  for (double e : eps) out.push_back(ws.bounds(e, opt));
  std::vector<std::size_t> idx(eps.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return eps[a] < eps[b]; });
  // Upper: anything feasible at a smaller eps is feasible at a larger one.
  for (std::size_t k = 1; k < idx.size(); ++k) {
    EntropyBounds& cur = out[idx[k]];
    const EntropyBounds& prev = out[idx[k - 1]];
    if (prev.upper < cur.upper) {
      cur.upper = prev.upper;
      cur.upper_method = prev.upper_method;
      cur.witness = prev.witness;
    }
  }
  // Lower: a bound at a larger eps also holds at a smaller one.
  for (std::size_t k = idx.size(); k-- > 1;) {
    EntropyBounds& cur = out[idx[k - 1]];
    const EntropyBounds& next = out[idx[k]];
    cur.lower = std::max(cur.lower, next.lower);
  }
  for (auto& b : out) {
    if (b.lower > b.upper) {
      b.lower = b.upper;
      b.lower_clamped = true;
    }
  }
  return out;
}

OracleValue epsilon_entropy_oracle(const SemimetricMatrix& d, const DiscreteMeasure& mu,
                                   double eps) {
  if (!(eps > 0.0)) throw DomainError("entropy oracle: eps must be positive");
  if (d.size() != mu.size()) throw StructuralError("entropy oracle: size mismatch");
  const std::size_t n = mu.size();
  if (n > kOracleMaxAtoms) throw SizeError("entropy oracle: more than five atoms");

  double best = mu.entropy();
  std::vector<std::size_t> f(n, 0);
  std::vector<double> lam(n);
  auto entropy_of_map = [&](std::size_t split, std::size_t y2, double alpha) {
    std::fill(lam.begin(), lam.end(), 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      if (x == split) {
        lam[f[x]] += alpha * mu[x];
        lam[y2] += (1 - alpha) * mu[x];
      } else {
        lam[f[x]] += mu[x];
      }
    }
    return entropy_bits(lam);
  };
  while (true) {
    double cost = 0.0;
    for (std::size_t x = 0; x < n; ++x) cost += mu[x] * d(x, f[x]);
    if (cost <= eps) best = std::min(best, entropy_of_map(n, 0, 1.0));
    // One atom split between its target and another so the budget binds.
    for (std::size_t x = 0; x < n; ++x) {
      if (mu[x] == 0.0) continue;
      const double rest = cost - mu[x] * d(x, f[x]);
      for (std::size_t y2 = 0; y2 < n; ++y2) {
        if (y2 == f[x]) continue;
        // alpha on f[x], 1 - alpha on y2: rest + mu_x (alpha a + (1-alpha) b) = eps
        const double a = d(x, f[x]);
        const double b = d(x, y2);
        if (a == b) continue;
        const double alpha = ((eps - rest) / mu[x] - b) / (a - b);
        if (alpha > 0.0 && alpha < 1.0) best = std::min(best, entropy_of_map(x, y2, alpha));
      }
    }
    std::size_t k = 0;
    while (k < n && ++f[k] == n) f[k++] = 0;
    if (k == n) break;
  }
  return {best, 0.0};
}

// ---------------------------------------------------------------------------

ScalingFamily ScalingFamily::power(double beta) {
  if (!(beta > 0.0)) throw DomainError("scaling family: beta must be positive");
  ScalingFamily f;
  f.form_ = Form::power;
  f.beta_ = beta;
  return f;
}

ScalingFamily ScalingFamily::exponential(std::vector<std::size_t> radices) {
  if (radices.empty()) throw DomainError("scaling family: no radices");
  for (std::size_t r : radices)
    if (r < 2) throw DomainError("scaling family: radices must be at least 2");
  ScalingFamily f;
  f.form_ = Form::exponential;
  f.radices_ = std::move(radices);
  return f;
}

ScalingFamily ScalingFamily::custom(std::map<std::pair<std::size_t, double>, double> table) {
  if (table.empty()) throw DomainError("scaling family: empty table");
  ScalingFamily f;
  f.form_ = Form::custom;
  f.table_ = std::move(table);
  return f;
}

double ScalingFamily::operator()(double eps, std::size_t n) const {
  switch (form_) {
    case Form::power:
      if (!(eps > 0.0 && eps < 1.0)) throw DomainError("power scaling needs 0 < eps < 1");
      return std::pow(static_cast<double>(n) * std::log2(1.0 / eps), beta_);
    case Form::exponential: {
      double c = 1.0;
      for (std::size_t i = 0; i < n; ++i)
        c *= static_cast<double>(radices_[std::min(i, radices_.size() - 1)]);
      return c;
    }
    case Form::custom: {
      auto it = table_.find({n, eps});
      if (it == table_.end()) throw DomainError("custom scaling: no entry for this (n, eps)");
      return it->second;
    }
  }
  return 0.0;
}

void ScalingFamily::validate(const std::vector<double>& eps, const std::vector<std::size_t>& ns) const {
  std::vector<double> es(eps);
  std::vector<std::size_t> nn(ns);
  std::sort(es.begin(), es.end());
  std::sort(nn.begin(), nn.end());
  for (double e : es)
    for (std::size_t i = 1; i < nn.size(); ++i)
      if (!((*this)(e, nn[i]) > (*this)(e, nn[i - 1])))
        throw DomainError("scaling family is not increasing in n");
  for (std::size_t n : nn)
    for (std::size_t i = 1; i < es.size(); ++i)
      if ((*this)(es[i], n) > (*this)(es[i - 1], n))
        throw DomainError("scaling family increases with eps");
}

std::string ScalingFamily::describe() const {
  std::ostringstream os;
  switch (form_) {
    case Form::power: os << "power(beta=" << beta_ << ")"; break;
    case Form::exponential:
      os << "exponential(r=";
      for (std::size_t i = 0; i < radices_.size(); ++i) os << (i ? "," : "") << radices_[i];
      os << ")";
      break;
    case Form::custom: os << "custom(" << table_.size() << " cells)"; break;
  }
  return os.str();
}

namespace {

void check_table(const HTable& t) {
  if (t.H.size() != t.epsilons.size()) throw StructuralError("H table: one row per eps required");
  for (const auto& row : t.H)
    if (row.size() != t.ns.size()) throw StructuralError("H table: one column per n required");
}

struct Line {
  double slope = 0.0, intercept = 0.0, r2 = 0.0, stderr_slope = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Line l;
  if (sxx <= 0.0) throw InsufficientDataError("fit: regressor has no spread");
  l.slope = sxy / sxx;
  l.intercept = my - l.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - l.intercept - l.slope * x[i];
    sse += e * e;
  }
  l.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  l.stderr_slope = x.size() > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  return l;
}

}  // namespace

ScaledEntropy scaled_entropy_eval(const HTable& t, const ScalingFamily& family) {
  check_table(t);
  if (t.epsilons.size() < 3 || t.ns.size() < 4)
    throw InsufficientDataError("scaled entropy: need at least 3 eps and 4 n values");
  std::vector<std::size_t> by_n(t.ns.size());
  std::iota(by_n.begin(), by_n.end(), 0);
  std::stable_sort(by_n.begin(), by_n.end(), [&](std::size_t a, std::size_t b) { return t.ns[a] < t.ns[b]; });
  const std::size_t quartile = (t.ns.size() + 3) / 4;
  ScaledEntropy out;
  std::size_t smallest = 0;
  for (std::size_t e = 0; e < t.epsilons.size(); ++e) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = t.ns.size() - quartile; k < t.ns.size(); ++k) {
      const std::size_t i = by_n[k];
      best = std::max(best, t.H[e][i] / family(t.epsilons[e], t.ns[i]));
    }
    out.profile.push_back(best);
    if (t.epsilons[e] < t.epsilons[smallest]) smallest = e;
  }
  out.h = out.profile[smallest];
  return out;
}

ScalingFit scaling_exponent_fit(const HTable& t) {
  check_table(t);
  std::vector<std::vector<double>> xs(t.epsilons.size()), ys(t.epsilons.size());
  std::size_t points = 0;
  for (std::size_t e = 0; e < t.epsilons.size(); ++e) {
    const double eps = t.epsilons[e];
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("fit: eps must lie in (0, 1)");
    for (std::size_t i = 0; i < t.ns.size(); ++i) {
      if (!(t.H[e][i] > 0.0) || t.ns[i] == 0) continue;
      xs[e].push_back(std::log2(static_cast<double>(t.ns[i]) * std::log2(1.0 / eps)));
      ys[e].push_back(std::log2(t.H[e][i]));
      ++points;
    }
  }
  if (points < 6) throw InsufficientDataError("fit: fewer than 6 positive cells");
  std::size_t groups = 0;
  std::vector<double> mx(xs.size(), 0.0), my(xs.size(), 0.0);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t e = 0; e < xs.size(); ++e) {
    if (xs[e].empty()) continue;
    ++groups;
    for (std::size_t i = 0; i < xs[e].size(); ++i) {
      mx[e] += xs[e][i];
      my[e] += ys[e][i];
    }
    mx[e] /= static_cast<double>(xs[e].size());
    my[e] /= static_cast<double>(xs[e].size());
    for (std::size_t i = 0; i < xs[e].size(); ++i) {
      sxx += (xs[e][i] - mx[e]) * (xs[e][i] - mx[e]);
      sxy += (xs[e][i] - mx[e]) * (ys[e][i] - my[e]);
      syy += (ys[e][i] - my[e]) * (ys[e][i] - my[e]);
    }
  }
  if (sxx <= 0.0) throw InsufficientDataError("fit: no variation in n within any eps row");
  if (points <= groups + 1) throw InsufficientDataError("fit: no residual degrees of freedom");
  ScalingFit f;
  f.beta = sxy / sxx;
  f.points = points;
  double sse = 0.0, isum = 0.0;
  f.intercepts.assign(xs.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t e = 0; e < xs.size(); ++e) {
    if (xs[e].empty()) continue;
    f.intercepts[e] = my[e] - f.beta * mx[e];
    isum += f.intercepts[e];
    for (std::size_t i = 0; i < xs[e].size(); ++i) {
      const double r = ys[e][i] - f.intercepts[e] - f.beta * xs[e][i];
      sse += r * r;
    }
  }
  f.intercept = isum / static_cast<double>(groups);
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.stderr_beta = std::sqrt(sse / static_cast<double>(points - groups - 1) / sxx);
  return f;
}

GrowthVerdict exponential_growth_test(const std::vector<std::size_t>& ns, const std::vector<double>& H) {
  if (ns.size() != H.size()) throw StructuralError("growth test: length mismatch");
  std::vector<double> x, lx, y;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(H[i] > 0.0) || ns[i] == 0) continue;
    x.push_back(static_cast<double>(ns[i]));
    lx.push_back(std::log2(static_cast<double>(ns[i])));
    y.push_back(std::log2(H[i]));
  }
  if (x.size() < 5) throw InsufficientDataError("growth test: fewer than 5 positive values");
  const Line e = least_squares(x, y);
  const Line p = least_squares(lx, y);
  GrowthVerdict v;
  v.rate = e.slope;
  v.r_squared = e.r2;
  v.power_r_squared = p.r2;
  v.exponential = e.slope > 0.1 && e.r2 > 0.9 && e.r2 >= p.r2;
  return v;
}

}  // namespace filtlab
