// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [N ...]     run the listed criteria (default: all)
//
// Monte Carlo criteria run the shipped configs through the experiment
// runner, so the numbers printed here are the ones the CLI produces.
// Exit status is 1 if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "filtlab/entropy.hpp"
#include "filtlab/filtration.hpp"
#include "filtlab/runner.hpp"
#include "filtlab/transport.hpp"
#include "filtlab/treewalk.hpp"
#include "support.hpp"

using namespace filtlab;
namespace fs = std::filesystem;
using testsupport::Rng;

namespace {

// Tolerances and budgets.
constexpr double kTransportTol = 1e-9;
constexpr double kAxiomTol = 1e-8;
constexpr double kOracleTol = 1e-9;       // the oracle is exact (error bar 0)
constexpr double kDyadicDecay = 0.2;      // c_6 / c_0 bound
constexpr double kSeparation = 2.0;       // stderr multiples
constexpr double kGrowthEps = 0.2;
constexpr double kBallEps = 0.2;
constexpr double kBallCeiling = 0.5;
constexpr double kOrbitAgreement = 0.10;  // relative
constexpr double kOrbitFirst = 0.75;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

fs::path work_dir() {
  fs::path p = fs::temp_directory_path() / "filtlab_acceptance";
  fs::create_directories(p);
  return p;
}

fs::path config_path(const std::string& name) { return fs::path(FILTLAB_CONFIG_DIR) / (name + ".json"); }

std::vector<fs::path> run_config(const std::string& name, unsigned threads, const fs::path& out) {
  RunOptions opt;
  opt.out_dir = out;
  opt.threads = threads;
  return run_experiment(load_config(config_path(name)), opt);
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::map<std::string, double> read_stats(const fs::path& p) {
  std::ifstream in(p);
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line == "statistic,value") continue;
    const auto comma = line.find(',');
    out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Outcome transport_oracle() {
  const auto t0 = Clock::now();
  Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 4;
    auto d = trial % 2 ? testsupport::random_metric(rng, n) : testsupport::random_integer_metric(rng, n, 5);
    std::uniform_int_distribution<std::size_t> sup(1, n);
    auto mu = testsupport::random_measure(rng, n, sup(rng));
    auto nu = testsupport::random_measure(rng, n, sup(rng));
    worst = std::max(worst, std::abs(kantorovich(mu, nu, d).value - kantorovich_bruteforce(mu, nu, d)));
  }
  double axiom = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 7;
    auto d = testsupport::random_metric(rng, n);
    auto a = testsupport::random_measure(rng, n, n);
    auto b = testsupport::random_measure(rng, n, n);
    auto c = testsupport::random_measure(rng, n, n);
    const double ab = kantorovich(a, b, d).value, ba = kantorovich(b, a, d).value;
    const double bc = kantorovich(b, c, d).value, ac = kantorovich(a, c, d).value;
    axiom = std::max({axiom, -ab, std::abs(ab - ba), kantorovich(a, a, d).value, ac - ab - bc});
  }
  const double secs = seconds_since(t0);
  return {worst <= kTransportTol && axiom <= kAxiomTol && secs < 30.0,
          "max |k - brute| = " + fmt(worst) + " over 1000 instances, worst axiom defect " + fmt(axiom) +
              " over 1000 triples, " + fmt(secs, 3) + " s"};
}

Outcome tree_oracle() {
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, cases = 0;
  const LabelMetric bit = LabelMetric::hamming(1);
  for (std::size_t n = 1; n <= 2; ++n) {
    const std::size_t leaves = std::size_t{1} << n;
    for (std::uint64_t a = 0; a < (1u << leaves); ++a)
      for (std::uint64_t b = 0; b < (1u << leaves); ++b) {
        std::vector<std::uint64_t> la(leaves), lb(leaves);
        for (std::size_t i = 0; i < leaves; ++i) la[i] = (a >> i) & 1, lb[i] = (b >> i) & 1;
        auto x = TreeLeafSystem::homogeneous(2, n, la, bit);
        auto y = TreeLeafSystem::homogeneous(2, n, lb, bit);
        mismatches += tree_distance(x, y) != tree_distance_bruteforce(x, y);
        ++cases;
      }
  }
  Rng rng(1002);
  for (int trial = 0; trial < 500; ++trial) {
    const LabelMetric base = LabelMetric::matrix(testsupport::random_metric(rng, 5));
    std::uniform_int_distribution<std::uint64_t> letter(0, 4);
    std::vector<std::uint64_t> la(3), lb(3);
    for (auto& v : la) v = letter(rng);
    for (auto& v : lb) v = letter(rng);
    auto x = TreeLeafSystem::homogeneous(3, 1, la, base);
    auto y = TreeLeafSystem::homogeneous(3, 1, lb, base);
    mismatches += tree_distance(x, y) != tree_distance_bruteforce(x, y);
    ++cases;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60.0,
          std::to_string(cases) + " instances (all 256 binary pairs at n = 2 included), " +
              std::to_string(mismatches) + " mismatches, " + fmt(secs, 3) + " s"};
}

Outcome dyadic_decay() {
  const auto t0 = Clock::now();
  const ProductModel m = dyadic_bernoulli_model(7);
  const auto prof = standardness_profile(m.cylinder_hamming(7), m.uniform_measure(), m.chain());
  bool strict = true;
  for (std::size_t n = 1; n < prof.c.size(); ++n) strict = strict && prof.c[n] < prof.c[n - 1];
  const double ratio = prof.c[6] / prof.c[0];
  const double secs = seconds_since(t0);
  return {strict && ratio < kDyadicDecay && secs < 10.0,
          "c_0 = " + fmt(prof.c[0]) + ", c_6 = " + fmt(prof.c[6]) + ", ratio " + fmt(ratio) +
              (strict ? ", strictly decreasing" : ", NOT strictly decreasing") + ", " + fmt(secs, 3) + " s"};
}

Outcome nonstandardness_signal() {
  const auto t0 = Clock::now();
  const fs::path out = work_dir() / "c4";
  run_config("f2_standardness", 1, out);
  run_config("z1_standardness", 1, out);
  const auto f2 = read_json(out / "f2_standardness.json")["rows"];
  const auto z1 = read_json(out / "z1_standardness.json")["rows"];
  bool ok = true;
  std::string detail;
  for (std::size_t n : {5, 6}) {
    const auto& a = f2[n - 1];
    const auto& b = z1[n - 1];
    ok = ok && a["ci_low"].get<double>() > b["ci_high"].get<double>();
    detail += "n=" + std::to_string(n) + ": F2 " + fmt(a["c_n"].get<double>()) + " [" + fmt(a["ci_low"].get<double>()) +
              ", " + fmt(a["ci_high"].get<double>()) + "] vs Z1 " + fmt(b["c_n"].get<double>()) + " [" +
              fmt(b["ci_low"].get<double>()) + ", " + fmt(b["ci_high"].get<double>()) + "]; ";
  }
  const double secs = seconds_since(t0);
  Outcome o{ok && secs < 600.0, detail + fmt(secs, 3) + " s"};
  if (!ok)
    o.notes.push_back("F2 trees have valence 4 and Z1 trees valence 2; at n = 1 the exact values are "
                      "E|Bin(8,1/2)-4|/4 = 0.273 (F2) and E|Bin(4,1/2)-2|/2 = 0.375 (Z1), and the "
                      "ordering persists through n = 6");
  return o;
}

Outcome exponent_ordering() {
  const auto t0 = Clock::now();
  const fs::path out = work_dir() / "c5";
  run_config("z1_scaling_fit", 1, out);
  run_config("z2_scaling_fit", 1, out);
  auto z1 = read_stats(out / "z1_scaling_fit_fit.csv");
  auto z2 = read_stats(out / "z2_scaling_fit_fit.csv");
  const double b1 = z1["beta_hat"], s1 = z1["stderr"], b2 = z2["beta_hat"], s2 = z2["stderr"];
  const double gap = (b2 - b1) / std::hypot(s1, s2);
  const double secs = seconds_since(t0);
  return {gap > kSeparation && b1 > kSeparation * s1 && secs < 1800.0,
          "beta(Z1) = " + fmt(b1) + " +- " + fmt(s1) + ", beta(Z2) = " + fmt(b2) + " +- " + fmt(s2) +
              ", separation " + fmt(gap, 3) + " stderr, " + fmt(secs, 3) + " s"};
}

Outcome free_group_growth() {
  const auto t0 = Clock::now();
  const fs::path out = work_dir() / "c6";
  run_config("f2_growth", 1, out);
  run_config("z1_growth", 1, out);
  const std::string key = "exponential_eps=" + format_double(kGrowthEps);
  auto f2 = read_stats(out / "f2_growth_fit.csv");
  auto z1 = read_stats(out / "z1_growth_fit.csv");
  auto h_at = [&](const std::string& file) {
    std::string s;
    const nlohmann::json doc = read_json(out / file);
    for (const auto& c : doc["cells"])
      if (c["epsilon"].get<double>() == kGrowthEps) s += (s.empty() ? "" : " ") + fmt(c["H_upper"].get<double>(), 3);
    return s;
  };
  const bool f2_exp = f2[key] == 1.0, z1_exp = z1[key] == 1.0;
  const double secs = seconds_since(t0);
  Outcome o{f2_exp && !z1_exp && secs < 900.0,
            std::string("F2 ") + (f2_exp ? "exponential" : "subexponential") + " (H = " + h_at("f2_growth.json") +
                "), Z1 " + (z1_exp ? "exponential" : "subexponential") + " (H = " + h_at("z1_growth.json") +
                "), " + fmt(secs, 3) + " s"};
  if (!f2_exp)
    o.notes.push_back("at eps = 0.2 a single atom is already within eps of the F2 sample (best "
                      "1-median cost about 0.16 for n >= 3), so H_eps is 0 at every n");
  return o;
}

Outcome oracle_containment() {
  const auto t0 = Clock::now();
  Rng rng(1007);
  std::size_t violations = 0, checks = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + trial % 4;
    auto d = trial % 2 ? testsupport::random_metric(rng, n) : testsupport::random_integer_metric(rng, n, 3).scaled(0.25);
    std::uniform_int_distribution<std::size_t> sup(1, n);
    auto mu = testsupport::random_measure(rng, n, sup(rng));
    for (double eps : {0.05, 0.1, 0.3}) {
      const auto b = epsilon_entropy_bounds(d, mu, eps);
      const double o = epsilon_entropy_oracle(d, mu, eps).value;
      const double miss = std::max(b.lower - o, o - b.upper);
      worst = std::max(worst, miss);
      violations += miss > kOracleTol;
      ++checks;
    }
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 300.0,
          std::to_string(checks) + " (space, eps) cases, " + std::to_string(violations) +
              " outside [lower, upper], worst excursion " + fmt(worst) + ", " + fmt(secs, 3) + " s"};
}

Outcome exponential_entropy_identity() {
  const auto t0 = Clock::now();
  const fs::path out = work_dir() / "c8";
  run_config("orbit_entropy", 1, out);
  const auto stats = read_stats(out / "orbit_entropy_fit.csv");
  std::ifstream in(out / "orbit_entropy.csv");
  std::string line;
  double h1 = -1.0;
  while (std::getline(in, line))
    if (line.rfind("1,", 0) == 0) h1 = std::stod(line.substr(line.rfind(',') + 1));
  const double exp_h = stats.at("exponential_entropy");
  const double scaled = stats.at("scaled_entropy_h");
  const double rel = std::abs(exp_h - scaled) / exp_h;
  const double secs = seconds_since(t0);
  return {rel < kOrbitAgreement && h1 == kOrbitFirst,
          "h_4 orbit = " + fmt(exp_h, 6) + ", scaled (prod r_i) = " + fmt(scaled, 6) + ", relative gap " +
              fmt(rel) + ", h_1 = " + fmt(h1, 17) + ", " + fmt(secs, 3) + " s"};
}

Outcome invariance_suite() {
  const auto t0 = Clock::now();
  Rng rng(1009);
  std::size_t broken = 0;
  for (int trial = 0; trial < 200; ++trial) {
    // epsilon-entropy bounds under a measure-preserving isometric relabeling
    const std::size_t n = 3 + trial % 10;
    auto d = testsupport::random_metric(rng, n);
    auto mu = testsupport::random_measure(rng, n, n);
    auto p = testsupport::random_permutation(rng, n);
    const double eps = 0.02 + 0.01 * (trial % 5);
    auto b1 = epsilon_entropy_bounds(d, mu, eps);
    auto b2 = epsilon_entropy_bounds(d.relabeled(p), mu.relabeled(p), eps);
    broken += b1.lower != b2.lower || b1.upper != b2.upper;

    // tree distance under automorphisms of either argument
    const std::vector<std::size_t> radices{2, 3};
    const LabelMetric base = LabelMetric::matrix(testsupport::random_metric(rng, 4));
    std::uniform_int_distribution<std::uint64_t> letter(0, 3);
    std::vector<std::uint64_t> la(6), lb(6);
    for (auto& v : la) v = letter(rng);
    for (auto& v : lb) v = letter(rng);
    TreeLeafSystem x{radices, la, base}, y{radices, lb, base};
    const double t = tree_distance(x, y);
    broken += tree_distance(permute_leaves(x, random_tree_automorphism(radices, rng)),
                            permute_leaves(y, random_tree_automorphism(radices, rng))) != t;

    // rho_k matrices under chain-preserving relabelings
    ProductModel m{{2, 2}, 3};
    auto rho0 = testsupport::random_metric(rng, m.size());
    auto w = testsupport::random_measure(rng, m.size(), m.size());
    auto perm = testsupport::chain_automorphism(m, rng);
    auto base_levels = iterate_semimetric(rho0, w, m.chain(), 2);
    auto moved = iterate_semimetric(rho0.relabeled(perm), w.relabeled(perm), m.chain(), 2);
    for (std::size_t k = 0; k < 2; ++k) broken += !(moved[k].expand() == base_levels[k].expand().relabeled(perm));
  }
  const double secs = seconds_since(t0);
  return {broken == 0, "200 instances x (entropy bounds, tree distance, rho_1, rho_2): " + std::to_string(broken) +
                           " exact mismatches, " + fmt(secs, 3) + " s"};
}

Outcome ball_measure_trend() {
  const auto t0 = Clock::now();
  const fs::path out = work_dir() / "c10";
  run_config("f2_ball_measure", 1, out);
  std::vector<nlohmann::json> rows;
  std::vector<nlohmann::json> small;
  const nlohmann::json doc = read_json(out / "f2_ball_measure.json");
  for (const auto& r : doc["rows"]) {
    if (r["epsilon"].get<double>() == kBallEps) rows.push_back(r);
    else small.push_back(r);
  }
  bool nonincreasing = true;
  std::string detail = "eps = 0.2:";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i && rows[i]["ci_low"].get<double>() > rows[i - 1]["ci_high"].get<double>()) nonincreasing = false;
    detail += " n=" + std::to_string(rows[i]["n"].get<int>()) + " " + fmt(rows[i]["value"].get<double>(), 3) + " [" +
              fmt(rows[i]["ci_low"].get<double>(), 3) + ", " + fmt(rows[i]["ci_high"].get<double>(), 3) + "]";
  }
  const double last = rows.back()["value"].get<double>();
  const double secs = seconds_since(t0);
  Outcome o{nonincreasing && last < kBallCeiling, detail + ", " + fmt(secs, 3) + " s"};
  bool points_fall = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    points_fall = points_fall && rows[i]["value"].get<double>() <= rows[i - 1]["value"].get<double>();
  if (o.pass && !points_fall)
    o.notes.push_back("passes through CI overlap only: the point estimates rise with n");
  if (!o.pass) {
    std::string s = "F2 distances shrink with n at this scale (mean rho_n 0.23 -> 0.19 for n = 3..6), so the "
                    "0.2-ball grows; the eps = 0.1 column of the same run:";
    for (const auto& r : small) s += " " + fmt(r["value"].get<double>(), 3);
    o.notes.push_back(s);
  }
  return o;
}

Outcome determinism() {
  const auto t0 = Clock::now();
  const std::vector<std::string> configs{"z1_standardness", "f2_standardness", "z1_scaling_fit", "z2_scaling_fit",
                                         "f2_growth",       "z1_growth",       "f2_ball_measure"};
  std::size_t files = 0, differ = 0;
  for (const auto& name : configs) {
    std::vector<std::vector<fs::path>> outs;
    for (unsigned threads : {1u, 4u, 8u})
      outs.push_back(run_config(name, threads, work_dir() / "c11" / ("t" + std::to_string(threads))));
    for (std::size_t k = 0; k < outs[0].size(); ++k) {
      const std::string ref = slurp(outs[0][k]);
      ++files;
      differ += slurp(outs[1][k]) != ref || slurp(outs[2][k]) != ref;
    }
  }
  const double secs = seconds_since(t0);
  return {differ == 0, std::to_string(files) + " result files from " + std::to_string(configs.size()) +
                           " Monte Carlo configs at 1/4/8 workers, " + std::to_string(differ) + " differ, " +
                           fmt(secs, 3) + " s"};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "transport oracle", transport_oracle},
      {2, "tree-distance oracle", tree_oracle},
      {3, "dyadic standardness decay", dyadic_decay},
      {4, "nonstandardness signal F2 vs Z1", nonstandardness_signal},
      {5, "scaling exponent ordering Z2 > Z1 > 0", exponent_ordering},
      {6, "free-group exponential regime", free_group_growth},
      {7, "epsilon-entropy oracle containment", oracle_containment},
      {8, "exponential entropy identity", exponential_entropy_identity},
      {9, "relabeling invariance", invariance_suite},
      {10, "F2 ball-measure trend", ball_measure_trend},
      {11, "determinism across worker counts", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  bool all_pass = true;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << "): " << o.detail << "\n";
    for (const auto& n : o.notes) std::cout << "     note: " << n << "\n";
    std::cout.flush();
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
