#include "filtlab/transport.hpp"

#include <algorithm>
#include <bit>
#include <climits>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace filtlab {

std::vector<double> Coupling::row_sums() const {
  std::vector<double> s(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s[i] += q_[i * cols_ + j];
  return s;
}

std::vector<double> Coupling::col_sums() const {
  std::vector<double> s(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s[j] += q_[i * cols_ + j];
  return s;
}

namespace {

using i128 = __int128;
using boost::multiprecision::int256_t;

// Bits kept below the total mass, so marginal totals stay inside int128.
constexpr int kWeightBits = 118;
// Potentials are sums of up to (rows + cols) costs.
constexpr int kCostBits = 96;

int low_exponent(double x) {
  int e = 0;
  const double f = std::frexp(x, &e);
  const auto mant = static_cast<std::uint64_t>(std::ldexp(f, 53));
  return e - 53 + std::countr_zero(mant);
}

int high_exponent(double x) {
  int e = 0;
  std::frexp(x, &e);
  return e - 1;
}

// Exponent g such that every value is (after rounding) an integer multiple
// of 2^g, keeping at most `bits` significant bits below 2^top.
int grid_exponent(std::span<const double> values, int top, int bits) {
  int lo = INT_MAX;
  for (double v : values)
    if (v > 0.0) lo = std::min(lo, low_exponent(v));
  if (lo == INT_MAX) return 0;
  return std::max(lo, top - bits);
}

int top_exponent(std::span<const double> values) {
  int hi = INT_MIN;
  for (double v : values)
    if (v > 0.0) hi = std::max(hi, high_exponent(v));
  return hi == INT_MIN ? 0 : hi;
}

i128 to_i128(double x) {
  if (x < 0.0) return -to_i128(-x);
  constexpr double kTwo64 = 18446744073709551616.0;
  const double hi = std::floor(x / kTwo64);
  const double lo = x - hi * kTwo64;
  return (static_cast<i128>(static_cast<std::uint64_t>(hi)) << 64) +
         static_cast<i128>(static_cast<std::uint64_t>(lo));
}

i128 on_grid(double v, int g) { return to_i128(std::nearbyint(std::ldexp(v, -g))); }

int256_t widen(i128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
  int256_t r = static_cast<std::uint64_t>(u >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(u & 0xffffffffffffffffULL);
  return neg ? -r : r;
}

// Balanced transportation problem on integers. Nodes 0..n-1 are rows,
// n..n+m-1 are columns; the basis is a spanning tree of n+m-1 cells.
class IntegerNetworkSimplex {
 public:
  IntegerNetworkSimplex(std::vector<i128> supply, std::vector<i128> demand,
                        std::vector<i128> cost)
      : n_(static_cast<int>(supply.size())),
        m_(static_cast<int>(demand.size())),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        cost_(std::move(cost)) {}

  void run();

  struct Cell {
    int row;
    int col;
    i128 flow;
  };
  const std::vector<Cell>& basis() const { return basis_; }
  std::size_t pivots() const { return pivots_; }

 private:
  i128 reduced_cost(int cell) const {
    const int i = cell / m_;
    const int j = cell % m_;
    return cost_[cell] - pot_[i] - pot_[n_ + j];
  }
  void initial_basis();
  void rebuild_tree();
  bool find_entering(bool bland, int& cell);
  bool pivot(int cell);  // returns true when the pivot was degenerate
  void detach(int arc);
  void attach(int arc);

  int n_;
  int m_;
  std::vector<i128> supply_;
  std::vector<i128> demand_;
  std::vector<i128> cost_;

  std::vector<Cell> basis_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_;
  std::vector<int> parent_arc_;
  std::vector<int> depth_;
  std::vector<i128> pot_;
  std::vector<int> order_;
  int next_cell_ = 0;
  std::size_t pivots_ = 0;
};

void IntegerNetworkSimplex::initial_basis() {
  // Matrix-minimum rule: exactly one line retires per cell except the last,
  // which yields a spanning tree even when allocations are degenerate.
  const int total = n_ * m_;
  std::vector<int> cells(total);
  std::iota(cells.begin(), cells.end(), 0);
  std::stable_sort(cells.begin(), cells.end(),
                   [&](int a, int b) { return cost_[a] < cost_[b]; });
  std::vector<i128> ra = supply_;
  std::vector<i128> rb = demand_;
  std::vector<char> row_done(n_, 0);
  std::vector<char> col_done(m_, 0);
  int rows_left = n_;
  int cols_left = m_;
  basis_.reserve(n_ + m_ - 1);
  for (int cell : cells) {
    const int i = cell / m_;
    const int j = cell % m_;
    if (row_done[i] || col_done[j]) continue;
    const i128 f = std::min(ra[i], rb[j]);
    basis_.push_back({i, j, f});
    ra[i] -= f;
    rb[j] -= f;
    if (rows_left == 1 && cols_left == 1) break;
    if (ra[i] == 0 && (rb[j] != 0 || rows_left > 1)) {
      row_done[i] = 1;
      --rows_left;
    } else {
      col_done[j] = 1;
      --cols_left;
    }
  }
  if (static_cast<int>(basis_.size()) != n_ + m_ - 1)
    throw std::logic_error("transport: initial basis is not a spanning tree");
  adj_.assign(n_ + m_, {});
  for (int a = 0; a < static_cast<int>(basis_.size()); ++a) attach(a);
}

void IntegerNetworkSimplex::attach(int arc) {
  adj_[basis_[arc].row].push_back(arc);
  adj_[n_ + basis_[arc].col].push_back(arc);
}

void IntegerNetworkSimplex::detach(int arc) {
  for (int node : {basis_[arc].row, n_ + basis_[arc].col}) {
    auto& v = adj_[node];
    v.erase(std::find(v.begin(), v.end(), arc));
  }
}

void IntegerNetworkSimplex::rebuild_tree() {
  const int nodes = n_ + m_;
  parent_.assign(nodes, -1);
  parent_arc_.assign(nodes, -1);
  depth_.assign(nodes, -1);
  pot_.assign(nodes, 0);
  order_.clear();
  order_.push_back(0);
  depth_[0] = 0;
  for (std::size_t head = 0; head < order_.size(); ++head) {
    const int u = order_[head];
    for (int a : adj_[u]) {
      const Cell& c = basis_[a];
      const int v = (u < n_) ? n_ + c.col : c.row;
      if (depth_[v] >= 0) continue;
      depth_[v] = depth_[u] + 1;
      parent_[v] = u;
      parent_arc_[v] = a;
      // u_i + v_j = c_ij on every basic cell.
      pot_[v] = cost_[c.row * m_ + c.col] - pot_[u];
      order_.push_back(v);
    }
  }
  if (static_cast<int>(order_.size()) != nodes)
    throw std::logic_error("transport: basis lost connectivity");
}

bool IntegerNetworkSimplex::find_entering(bool bland, int& cell) {
  const int total = n_ * m_;
  if (bland) {
    for (int c = 0; c < total; ++c) {
      if (reduced_cost(c) < 0) {
        cell = c;
        return true;
      }
    }
    return false;
  }
  const int block = std::max(16, static_cast<int>(std::sqrt(static_cast<double>(total))));
  i128 best = 0;
  int best_cell = -1;
  int c = next_cell_;
  for (int k = 0; k < total; ++k) {
    const i128 rc = reduced_cost(c);
    if (rc < best) {
      best = rc;
      best_cell = c;
    }
    if (++c == total) c = 0;
    if ((k + 1) % block == 0 && best_cell >= 0) break;
  }
  next_cell_ = c;
  if (best_cell < 0) return false;
  cell = best_cell;
  return true;
}

bool IntegerNetworkSimplex::pivot(int cell) {
  const int i = cell / m_;
  const int j = cell % m_;
  // Cycle: entering cell i -> j, then back from j to i along the tree.
  // Arcs traversed column-to-row lose flow.
  struct Step {
    int arc;
    bool minus;
  };
  std::vector<Step> steps;
  int a = i;
  int b = n_ + j;
  std::vector<Step> from_row;
  std::vector<Step> from_col;
  while (a != b) {
    if (depth_[a] >= depth_[b]) {
      from_row.push_back({parent_arc_[a], a < n_});
      a = parent_[a];
    } else {
      from_col.push_back({parent_arc_[b], b >= n_});
      b = parent_[b];
    }
  }
  steps.reserve(from_row.size() + from_col.size());
  steps.insert(steps.end(), from_col.begin(), from_col.end());
  steps.insert(steps.end(), from_row.begin(), from_row.end());

  i128 theta = -1;
  int leaving = -1;
  int leaving_key = INT_MAX;
  for (const Step& s : steps) {
    if (!s.minus) continue;
    const Cell& c = basis_[s.arc];
    const int key = c.row * m_ + c.col;
    if (theta < 0 || c.flow < theta || (c.flow == theta && key < leaving_key)) {
      theta = c.flow;
      leaving = s.arc;
      leaving_key = key;
    }
  }
  if (leaving < 0) throw std::logic_error("transport: unbounded pivot");
  for (const Step& s : steps) basis_[s.arc].flow += s.minus ? -theta : theta;
  detach(leaving);
  basis_[leaving] = {i, j, theta};
  attach(leaving);
  rebuild_tree();
  ++pivots_;
  return theta == 0;
}

void IntegerNetworkSimplex::run() {
  initial_basis();
  rebuild_tree();
  const std::size_t nodes = static_cast<std::size_t>(n_ + m_);
  const std::size_t stall_limit = 64 + nodes;
  const std::size_t pivot_cap = 1000 + 200 * nodes * nodes;
  std::size_t degenerate_run = 0;
  bool bland = false;
  int cell = -1;
  while (find_entering(bland, cell)) {
    if (pivot(cell)) {
      // Long degenerate stalls switch to Bland's rule, which cannot cycle.
      if (++degenerate_run > stall_limit) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
    if (pivots_ > pivot_cap) throw std::runtime_error("transport: pivot cap exceeded");
  }
}

}  // namespace

TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                std::span<const double> cost) {
  if (cost.size() != supply.size() * demand.size())
    throw StructuralError("transport: cost matrix shape does not match marginals");
  for (double v : supply)
    if (!std::isfinite(v) || v < 0.0) throw StructuralError("transport: bad supply entry");
  for (double v : demand)
    if (!std::isfinite(v) || v < 0.0) throw StructuralError("transport: bad demand entry");
  for (double v : cost)
    if (!std::isfinite(v) || v < 0.0) throw StructuralError("transport: bad cost entry");
  const double sa = order_invariant_sum({supply.begin(), supply.end()});
  const double sb = order_invariant_sum({demand.begin(), demand.end()});
  if (std::fabs(sa - sb) > kMeasureTolerance * std::max(1.0, sa))
    throw DomainError("transport: marginals carry different total mass");

  // Mass grid shared by both marginals.
  std::vector<double> all_mass(supply.begin(), supply.end());
  all_mass.insert(all_mass.end(), demand.begin(), demand.end());
  const int g = grid_exponent(all_mass, high_exponent(std::max(sa, sb)) + 1, kWeightBits);

  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::vector<i128> a;
  std::vector<i128> b;
  for (std::size_t i = 0; i < supply.size(); ++i) {
    const i128 v = on_grid(supply[i], g);
    if (v > 0) {
      rows.push_back(i);
      a.push_back(v);
    }
  }
  for (std::size_t j = 0; j < demand.size(); ++j) {
    const i128 v = on_grid(demand[j], g);
    if (v > 0) {
      cols.push_back(j);
      b.push_back(v);
    }
  }
  TransportResult result;
  result.plan = Coupling(supply.size(), demand.size());
  if (rows.empty() || cols.empty()) return result;

  std::vector<double> sub_cost;
  sub_cost.reserve(rows.size() * cols.size());
  for (std::size_t i : rows)
    for (std::size_t j : cols) sub_cost.push_back(cost[i * demand.size() + j]);
  const int h = grid_exponent(sub_cost, top_exponent(sub_cost), kCostBits);

  const i128 total_a = std::accumulate(a.begin(), a.end(), i128{0});
  const i128 total_b = std::accumulate(b.begin(), b.end(), i128{0});
  const bool dummy_col = total_a > total_b;
  const bool dummy_row = total_b > total_a;
  const std::size_t n = rows.size() + (dummy_row ? 1 : 0);
  const std::size_t m = cols.size() + (dummy_col ? 1 : 0);
  if (dummy_row) a.push_back(total_b - total_a);
  if (dummy_col) b.push_back(total_a - total_b);

  std::vector<i128> c(n * m, 0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      c[i * m + j] = on_grid(sub_cost[i * cols.size() + j], h);

  IntegerNetworkSimplex solver(std::move(a), std::move(b), c);
  solver.run();

  int256_t objective = 0;
  for (const auto& cell : solver.basis()) {
    const auto i = static_cast<std::size_t>(cell.row);
    const auto j = static_cast<std::size_t>(cell.col);
    if (i >= rows.size() || j >= cols.size() || cell.flow == 0) continue;
    objective += widen(cell.flow) * widen(c[i * m + j]);
    result.plan.at(rows[i], cols[j]) = std::ldexp(static_cast<double>(cell.flow), g);
  }
  result.value = std::ldexp(objective.convert_to<double>(), g + h);
  result.pivots = solver.pivots();
  return result;
}

TransportResult kantorovich(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const SemimetricMatrix& d) {
  if (mu.size() != nu.size() || mu.size() != d.size())
    throw StructuralError("kantorovich: measures and semimetric differ in size");
  return solve_transport(mu.weights(), nu.weights(), d.data());
}

double kantorovich_bruteforce(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const SemimetricMatrix& d) {
  if (mu.size() != nu.size() || mu.size() != d.size())
    throw StructuralError("kantorovich_bruteforce: size mismatch");
  const auto rows = mu.support();
  const auto cols = nu.support();
  if (rows.size() > kBruteforceMaxSupport || cols.size() > kBruteforceMaxSupport)
    throw SizeError("kantorovich_bruteforce: supports larger than 5 points");
  const int n = static_cast<int>(rows.size());
  const int m = static_cast<int>(cols.size());
  const int nodes = n + m;
  // Spanning trees rooted at row 0: every column picks a parent row, every
  // other row picks a parent column. Cyclic choices are rejected.
  std::vector<int> choice(nodes, 0);  // choice[0] unused
  std::vector<int> parent(nodes, -1);
  std::vector<int> order(nodes);
  std::vector<int> depth(nodes);
  std::vector<double> subtree(nodes);
  double best = std::numeric_limits<double>::infinity();
  constexpr double kTol = 1e-12;

  auto radix = [&](int v) { return v < n ? m : n; };
  while (true) {
    for (int v = 1; v < nodes; ++v) parent[v] = v < n ? n + choice[v] : choice[v];
    parent[0] = -1;
    bool tree = true;
    for (int v = 0; v < nodes && tree; ++v) {
      int u = v;
      int steps = 0;
      while (u != 0 && steps <= nodes) {
        u = parent[u];
        ++steps;
      }
      if (u != 0) tree = false;
      depth[v] = steps;
    }
    if (tree) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int x, int y) { return depth[x] > depth[y]; });
      for (int v = 0; v < nodes; ++v)
        subtree[v] = v < n ? mu[rows[v]] : -nu[cols[v - n]];
      double cost = 0.0;
      bool feasible = true;
      for (int v : order) {
        if (v == 0) continue;
        const int p = parent[v];
        subtree[p] += subtree[v];
        const double flow = v < n ? subtree[v] : -subtree[v];
        if (flow < -kTol) {
          feasible = false;
          break;
        }
        const std::size_t r = rows[v < n ? v : p];
        const std::size_t c = cols[(v < n ? p : v) - n];
        cost += std::max(flow, 0.0) * d(r, c);
      }
      if (feasible) best = std::min(best, cost);
    }
    // Next parent assignment (mixed-radix counter over nodes 1..nodes-1).
    int v = 1;
    while (v < nodes) {
      if (++choice[v] < radix(v)) break;
      choice[v] = 0;
      ++v;
    }
    if (v == nodes) break;
  }
  return best;
}

void write_plan_csv(std::ostream& os, const Coupling& plan) {
  os << "i,j,mass\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < plan.rows(); ++i)
    for (std::size_t j = 0; j < plan.cols(); ++j)
      if (plan(i, j) != 0.0) os << i << ',' << j << ',' << plan(i, j) << '\n';
  os.precision(old);
}

}  // namespace filtlab
