#include "filtlab/runner.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "filtlab/cache.hpp"
#include "filtlab/entropy.hpp"
#include "filtlab/errors.hpp"
#include "filtlab/experiment.hpp"
#include "filtlab/filtration.hpp"
#include "filtlab/groups.hpp"
#include "filtlab/treewalk.hpp"
#include "filtlab/walksim.hpp"

namespace filtlab {

using nlohmann::json;
namespace fs = std::filesystem;

ConfigError::ConfigError(const std::string& file, std::size_t line, const std::string& msg)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg), line_(line) {}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr int kSchemaVersion = 1;

// Typed access to config fields with errors pointing at the source line.
class Reader {
 public:
  explicit Reader(const Config& c) : c_(c) {}

  std::size_t line_of(const std::string& section, const std::string& key) const {
    std::size_t from = 0;
    if (!section.empty()) {
      auto s = c_.text.find("\"" + section + "\"");
      if (s != std::string::npos) from = s;
    }
    auto k = key.empty() ? from : c_.text.find("\"" + key + "\"", from);
    if (k == std::string::npos) k = from;
    return 1 + static_cast<std::size_t>(std::count(c_.text.begin(), c_.text.begin() + k, '\n'));
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const {
    throw ConfigError(c_.source, line_of(section, key), msg);
  }

  const json& section(const std::string& name) const {
    if (!c_.doc.contains(name) || !c_.doc.at(name).is_object())
      fail("", name, "missing object section \"" + name + "\"");
    return c_.doc.at(name);
  }

  const json& field(const std::string& sec, const std::string& key) const {
    const json& s = sec.empty() ? c_.doc : section(sec);
    if (!s.contains(key)) fail(sec, sec.empty() ? key : "", "missing field \"" + path(sec, key) + "\"");
    return s.at(key);
  }

  std::uint64_t uint(const std::string& sec, const std::string& key, std::uint64_t lo = 0,
                     std::uint64_t hi = UINT64_MAX) const {
    const json& v = field(sec, key);
    if (!v.is_number_unsigned()) fail(sec, key, "\"" + path(sec, key) + "\" must be a nonnegative integer");
    const auto x = v.get<std::uint64_t>();
    if (x < lo || x > hi)
      fail(sec, key, "\"" + path(sec, key) + "\" out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
  }

  std::uint64_t uint_or(const std::string& sec, const std::string& key, std::uint64_t dflt) const {
    const json& s = section(sec);
    return s.contains(key) ? uint(sec, key) : dflt;
  }

  double number(const std::string& sec, const std::string& key) const {
    const json& v = field(sec, key);
    if (!v.is_number()) fail(sec, key, "\"" + path(sec, key) + "\" must be a number");
    return v.get<double>();
  }

  std::string string(const std::string& sec, const std::string& key) const {
    const json& v = field(sec, key);
    if (!v.is_string()) fail(sec, key, "\"" + path(sec, key) + "\" must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& sec, const std::string& key, std::size_t min_len) const {
    const json& v = field(sec, key);
    if (!v.is_array() || v.size() < min_len)
      fail(sec, key, "\"" + path(sec, key) + "\" must be an array of at least " + std::to_string(min_len) + " numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(sec, key, "\"" + path(sec, key) + "\" must contain numbers only");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> sizes(const std::string& sec, const std::string& key, std::size_t min_len) const {
    const json& v = field(sec, key);
    if (!v.is_array() || v.size() < min_len)
      fail(sec, key, "\"" + path(sec, key) + "\" must be an array of at least " + std::to_string(min_len) + " integers");
    std::vector<std::size_t> out;
    for (const auto& x : v) {
      if (!x.is_number_unsigned() || x.get<std::size_t>() == 0)
        fail(sec, key, "\"" + path(sec, key) + "\" must contain positive integers only");
      out.push_back(x.get<std::size_t>());
    }
    return out;
  }

  std::vector<double> epsilons(const std::string& sec, std::size_t min_len) const {
    auto e = numbers(sec, "epsilons", min_len);
    for (double x : e)
      if (!(x > 0.0 && x < 1.0)) fail(sec, "epsilons", "epsilons must lie in (0, 1)");
    return e;
  }

  GroupSpec group() const {
    const std::string g = string("", "group");
    try {
      return GroupSpec::parse(g);
    } catch (const std::exception&) {
      fail("", "group", "unknown group \"" + g + "\" (expected Z<d>, F<s> or H3)");
    }
  }

 private:
  static std::string path(const std::string& sec, const std::string& key) {
    return sec.empty() ? key : sec + "." + key;
  }
  const Config& c_;
};

// ---------------------------------------------------------------------------
// Output

struct Csv {
  std::ostringstream body;
  explicit Csv(const Config& c, const std::string& header) {
    body << "# filtlab experiment=" << c.experiment << " config=" << c.hash << " seed=" << c.seed << "\n";
    body << header << "\n";
  }
  template <class... T>
  void row(const T&... cells) {
    std::size_t i = 0;
    ((body << (i++ ? "," : "") << cell(cells)), ...);
    body << "\n";
  }
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class I, class = std::enable_if_t<std::is_integral_v<I>>>
  static std::string cell(I v) { return std::to_string(v); }
};

class Writer {
 public:
  Writer(const Config& c, const RunOptions& o) : c_(c), o_(o) {}
  void csv(const std::string& suffix, const Csv& t) { write(c_.name + suffix + ".csv", t.body.str()); }
  void json_mirror(json j) {
    j["meta"] = {{"experiment", c_.experiment}, {"config_hash", c_.hash}, {"seed", c_.seed}};
    write(c_.name + ".json", j.dump(2) + "\n");
  }
  std::vector<fs::path> files;

 private:
  void write(const std::string& file, const std::string& text) {
    const fs::path p = o_.out_dir / file;
    atomic_write(p, text);
    files.push_back(p);
  }
  const Config& c_;
  const RunOptions& o_;
};

void log(const RunOptions& o, const std::string& msg) {
  if (o.log) *o.log << msg << std::endl;
}

// ---------------------------------------------------------------------------
// Walk parameters shared by the walk experiments

struct WalkParams {
  GroupSpec group;
  std::size_t m = 1;
  std::size_t samples = 0;
  std::uint64_t leaf_cap = kDefaultLeafCap;
};

WalkParams walk_params(const Reader& r, std::size_t depth_max, std::size_t min_samples) {
  WalkParams w;
  w.group = r.group();
  w.m = r.uint("walk", "m", 1, 64);
  w.samples = r.uint("walk", "samples", min_samples, 1u << 20);
  w.leaf_cap = r.uint_or("walk", "leaf_cap", kDefaultLeafCap);
  double leaves = std::pow(static_cast<double>(w.group.alphabet_size()), static_cast<double>(depth_max));
  if (leaves > static_cast<double>(w.leaf_cap))
    r.fail("walk", r.section("walk").contains("leaf_cap") ? "leaf_cap" : "",
           "depth " + std::to_string(depth_max) + " needs " + format_double(leaves) +
               " leaves, above walk.leaf_cap = " + std::to_string(w.leaf_cap));
  return w;
}

json matrix_key(const WalkParams& w, std::size_t n, std::uint64_t seed) {
  return {{"kind", "walk-distance-matrix"}, {"version", 1}, {"group", w.group.name()},
          {"n", n}, {"m", w.m}, {"samples", w.samples}, {"seed", seed}, {"leaf_cap", w.leaf_cap}};
}

MatrixSource cached_walk_matrices(const WalkParams& w, std::uint64_t seed, const RunOptions& o,
                                  const ResultCache& cache) {
  return [&w, seed, &o, &cache](std::size_t n) {
    const json key = matrix_key(w, n, seed);
    if (auto hit = cache.get_matrix(key)) {
      log(o, "cache hit: " + w.group.name() + " n=" + std::to_string(n));
      return *hit;
    }
    log(o, "distances: " + w.group.name() + " n=" + std::to_string(n) + " K=" + std::to_string(w.samples));
    WalkSample s{w.group, w.m, w.samples, seed, w.leaf_cap};
    SemimetricMatrix d = walk_distance_matrix(s, n, o.threads);
    cache.put_matrix(key, d);
    return d;
  };
}

ScalingFamily scaling_family(const Reader& r, const Config& c, const GroupSpec* group) {
  if (!c.doc.contains("scaling")) {
    if (group && group->kind == GroupKind::free) return ScalingFamily::exponential({group->alphabet_size()});
    if (group) return ScalingFamily::power(static_cast<double>(weighted_rank(*group)) / 2.0);
    return ScalingFamily::power(0.5);
  }
  const std::string form = r.string("scaling", "form");
  if (form == "power") {
    const double beta = r.number("scaling", "beta");
    if (!(beta > 0.0)) r.fail("scaling", "beta", "scaling.beta must be positive");
    return ScalingFamily::power(beta);
  }
  if (form == "exponential") {
    auto radices = r.sizes("scaling", "radices", 1);
    for (std::size_t x : radices)
      if (x < 2) r.fail("scaling", "radices", "scaling.radices must be at least 2");
    return ScalingFamily::exponential(radices);
  }
  r.fail("scaling", "form", "scaling.form must be \"power\" or \"exponential\"");
}

json table_json(const EntropyTable& t) {
  json cells = json::array();
  for (const auto& c : t.cells)
    cells.push_back({{"n", c.n}, {"epsilon", c.epsilon}, {"H_lower", c.lower}, {"H_upper", c.upper},
                     {"method", c.method}});
  return cells;
}

void write_htable(Writer& w, const Config& c, const EntropyTable& t) {
  Csv csv(c, "n,epsilon,H_lower,H_upper,method,seed");
  for (const auto& cell : t.cells) csv.row(cell.n, cell.epsilon, cell.lower, cell.upper, cell.method, c.seed);
  w.csv("_htable", csv);
}

// ---------------------------------------------------------------------------
// Experiments

void run_standardness(const Config& c, const Reader& r, const RunOptions& o, Writer& w) {
  const std::string model = r.string("", "model");
  Csv csv(c, "n,c_n,ci_low,ci_high");
  json mirror;
  if (model == "dyadic") {
    const std::size_t bits = r.uint("dyadic", "bits", 1, 16);
    const ProductModel pm = dyadic_bernoulli_model(bits);
    log(o, "dyadic model with " + std::to_string(pm.size()) + " points");
    const auto prof = standardness_profile(pm.cylinder_hamming(bits), pm.uniform_measure(), pm.chain(), o.threads);
    for (std::size_t n = 0; n < prof.c.size(); ++n) csv.row(n, prof.c[n], prof.c[n], prof.c[n]);
    mirror = {{"c", prof.c}, {"terminal_ratio", prof.terminal_ratio},
              {"strictly_decreasing", prof.strictly_decreasing}};
  } else if (model == "walk") {
    const std::size_t n_max = r.uint("walk", "n_max", 1, 64);
    const WalkParams wp = walk_params(r, n_max, 2);
    log(o, "mean distance profile: " + wp.group.name());
    const auto rows = mean_distance_profile(wp.group, n_max, wp.m, wp.samples, c.seed, o.threads, wp.leaf_cap);
    json jr = json::array();
    for (const auto& row : rows) {
      csv.row(row.n, row.c.value, row.c.ci_low, row.c.ci_high);
      jr.push_back({{"n", row.n}, {"c_n", row.c.value}, {"ci_low", row.c.ci_low}, {"ci_high", row.c.ci_high},
                    {"identity_matching", row.identity_matching.value}, {"pairs", row.c.samples}});
    }
    mirror = {{"group", wp.group.name()}, {"m", wp.m}, {"rows", jr}};
  } else {
    r.fail("", "model", "model must be \"walk\" or \"dyadic\"");
  }
  w.csv("", csv);
  w.json_mirror(mirror);
}

void run_ball_measure(const Config& c, const Reader& r, const RunOptions& o, Writer& w) {
  const auto ns = r.sizes("ball", "ns", 1);
  const auto eps = r.numbers("ball", "epsilons", 1);
  for (double e : eps)
    if (!(e >= 0.0)) r.fail("ball", "epsilons", "ball.epsilons must be nonnegative");
  const WalkParams wp = walk_params(r, *std::max_element(ns.begin(), ns.end()), 100);
  const WalkPoint center = WalkPoint::sampled(wp.group, derive_seed(c.seed, 4, 0), wp.m);
  log(o, "ball measure sweep: " + wp.group.name());
  const auto est = ball_measure_sweep(center, wp.group, ns, eps, wp.samples, c.seed, o.threads, wp.leaf_cap);
  Csv csv(c, "group,n,m,epsilon,statistic,value,ci_low,ci_high,seed");
  json rows = json::array();
  for (std::size_t i = 0; i < ns.size(); ++i)
    for (std::size_t e = 0; e < eps.size(); ++e) {
      const Estimate& x = est[i][e];
      csv.row(wp.group.name(), ns[i], std::min(wp.m, ns[i]), eps[e], "ball_measure", x.value, x.ci_low, x.ci_high, c.seed);
      rows.push_back({{"n", ns[i]}, {"epsilon", eps[e]}, {"value", x.value}, {"ci_low", x.ci_low},
                      {"ci_high", x.ci_high}, {"samples", x.samples}});
    }
  w.csv("", csv);
  w.json_mirror({{"group", wp.group.name()}, {"rows", rows}});
}

void fit_rows(Csv& csv, const HTable& upper, const std::vector<std::size_t>& ns, json& mirror) {
  try {
    const ScalingFit f = scaling_exponent_fit(upper);
    csv.row("beta_hat", f.beta);
    csv.row("stderr", f.stderr_beta);
    csv.row("intercept", f.intercept);
    csv.row("r_squared", f.r_squared);
    csv.row("points", static_cast<double>(f.points));
    mirror["fit"] = {{"beta_hat", f.beta}, {"stderr", f.stderr_beta}, {"r_squared", f.r_squared}, {"points", f.points}};
  } catch (const InsufficientDataError& e) {
    mirror["fit"] = {{"error", e.what()}};
  }
  for (std::size_t k = 0; k < upper.epsilons.size(); ++k) {
    const std::string tag = "_eps=" + format_double(upper.epsilons[k]);
    try {
      const GrowthVerdict v = exponential_growth_test(ns, upper.H[k]);
      csv.row("growth_rate" + tag, v.rate);
      csv.row("growth_r_squared" + tag, v.r_squared);
      csv.row("power_r_squared" + tag, v.power_r_squared);
      csv.row("exponential" + tag, v.exponential ? 1.0 : 0.0);
    } catch (const InsufficientDataError&) {
      csv.row("exponential" + tag, 0.0);
    }
  }
}

void run_scaling_fit(const Config& c, const Reader& r, const RunOptions& o, Writer& w) {
  const auto ns = r.sizes("entropy", "ns", 4);
  const auto eps = r.epsilons("entropy", 3);
  EntropyOptions eopt;
  if (r.section("entropy").contains("theta")) eopt.theta = r.number("entropy", "theta");
  if (!(eopt.theta > 0.5)) r.fail("entropy", "theta", "entropy.theta must exceed 0.5");
  const WalkParams wp = walk_params(r, *std::max_element(ns.begin(), ns.end()), 2);
  const ScalingFamily family = scaling_family(r, c, &wp.group);
  try {
    family.validate(eps, ns);
  } catch (const DomainError& e) {
    r.fail("scaling", "", e.what());
  }
  const ResultCache cache(o.cache_dir);
  const EntropyTable t = walk_entropy_table(ns, eps, cached_walk_matrices(wp, c.seed, o, cache), o.threads, eopt);
  write_htable(w, c, t);

  Csv fit(c, "statistic,value");
  json mirror{{"group", wp.group.name()}, {"family", family.describe()}, {"cells", table_json(t)}};
  fit_rows(fit, t.upper_table(), t.ns(), mirror);
  const ScaledEntropy se = scaled_entropy_eval(t.upper_table(), family);
  fit.row("scaled_entropy_h", se.h);
  mirror["scaled_entropy"] = {{"h", se.h}, {"profile", se.profile}};
  w.csv("_fit", fit);
  w.json_mirror(mirror);
}

void run_orbit_entropy(const Config& c, const Reader& r, const RunOptions& o, Writer& w) {
  const std::size_t n_max = r.uint("orbit", "n_max", 1, 8);
  const std::size_t radix = r.uint("orbit", "r", 2, 16);
  const auto law = r.numbers("orbit", "letter_law", 2);
  double total = 0.0;
  for (double p : law) {
    if (!(p >= 0.0)) r.fail("orbit", "letter_law", "orbit.letter_law must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) r.fail("orbit", "letter_law", "orbit.letter_law must sum to 1");
  const double words = std::pow(static_cast<double>(law.size()), std::pow(double(radix), double(n_max)));
  if (words > static_cast<double>(kMaxOrbitWords))
    r.fail("orbit", "n_max", "orbit space has " + format_double(words) + " words, above the cap of 2^20");
  std::vector<double> eps;
  if (c.doc.contains("entropy")) eps = r.epsilons("entropy", 1);
  log(o, "orbit partitions up to n=" + std::to_string(n_max));
  const OrbitEntropyResult res = orbit_entropy_experiment(n_max, radix, law, eps, o.threads);

  Csv csv(c, "n,orbit_count,orbit_entropy,h_n");
  for (const auto& row : res.rows) csv.row(row.n, row.orbit_count, row.orbit_entropy, row.h);
  w.csv("", csv);
  json mirror{{"nonincreasing", res.nonincreasing}};
  Csv fit(c, "statistic,value");
  fit.row("exponential_entropy", res.rows.back().h);
  fit.row("nonincreasing", res.nonincreasing ? 1.0 : 0.0);
  if (!eps.empty()) {
    write_htable(w, c, res.table);
    mirror["cells"] = table_json(res.table);
    if (eps.size() >= 3 && n_max >= 4) {
      const ScalingFamily family = c.doc.contains("scaling") ? scaling_family(r, c, nullptr)
                                                             : ScalingFamily::exponential({radix});
      const ScaledEntropy se = scaled_entropy_eval(res.table.upper_table(), family);
      fit.row("scaled_entropy_h", se.h);
      mirror["scaled_entropy"] = {{"h", se.h}, {"profile", se.profile}, {"family", family.describe()}};
    }
  }
  w.csv("_fit", fit);
  w.json_mirror(mirror);
}

void run_meeting(const Config& c, const Reader& r, const RunOptions& o, Writer& w) {
  const GroupSpec g = r.group();
  const std::size_t length = r.uint("meeting", "length", 1, 1u << 24);
  const std::size_t h = r.uint("meeting", "h", 1, 1u << 20);
  const double cc = r.number("meeting", "c");
  if (!(cc > 0.0)) r.fail("meeting", "c", "meeting.c must be positive");
  const std::size_t trials = r.uint("meeting", "trials", 1, 1u << 20);
  log(o, "meeting diagnostic: " + g.name());
  Csv csv(c, "trial,meeting_n");
  json rows = json::array();
  for (std::size_t t = 0; t < trials; ++t) {
    const auto u = sample_increments(g, length, derive_seed(c.seed, 5, 2 * t));
    const auto v = sample_increments(g, length, derive_seed(c.seed, 5, 2 * t + 1));
    const auto n = meeting_diagnostic(g, u, v, h, cc);
    csv.row(t, n ? std::to_string(*n) : std::string("none"));
    rows.push_back(n ? json(*n) : json(nullptr));
  }
  w.csv("", csv);
  w.json_mirror({{"group", g.name()}, {"meeting_n", rows}});
}

}  // namespace

Config parse_config(const std::string& text, const std::string& source,
                    std::optional<std::uint64_t> seed_override) {
  Config c;
  c.source = source;
  c.text = text;
  try {
    c.doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ConfigError(source, static_cast<std::size_t>(line), std::string("malformed JSON: ") + e.what());
  }
  if (!c.doc.is_object()) throw ConfigError(source, 1, "config must be a JSON object");
  Reader r(c);
  if (r.uint("", "schema_version") != kSchemaVersion)
    r.fail("", "schema_version", "unsupported schema_version (expected 1)");
  c.experiment = r.string("", "experiment");
  static const char* kinds[] = {"standardness", "ball-measure", "scaling-fit", "orbit-entropy",
                                "meeting-diagnostic"};
  if (std::find(std::begin(kinds), std::end(kinds), c.experiment) == std::end(kinds))
    r.fail("", "experiment", "unknown experiment \"" + c.experiment + "\"");
  if (seed_override) {
    c.seed = *seed_override;
  } else {
    if (!c.doc.contains("seed")) r.fail("", "", "missing field \"seed\" (or pass --seed)");
    c.seed = r.uint("", "seed");
  }
  c.name = c.doc.contains("name") ? r.string("", "name") : c.experiment;
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos)
    r.fail("", "name", "name must be a plain file stem");
  json effective = c.doc;
  effective["seed"] = c.seed;
  c.hash = json_hash(effective);
  return c;
}

Config load_config(const fs::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), seed_override);
}

std::vector<fs::path> run_experiment(const Config& c, const RunOptions& o) {
  Reader r(c);
  Writer w(c, o);
  if (c.experiment == "standardness") run_standardness(c, r, o, w);
  else if (c.experiment == "ball-measure") run_ball_measure(c, r, o, w);
  else if (c.experiment == "scaling-fit") run_scaling_fit(c, r, o, w);
  else if (c.experiment == "orbit-entropy") run_orbit_entropy(c, r, o, w);
  else run_meeting(c, r, o, w);
  return w.files;
}

// ---------------------------------------------------------------------------
// compare

namespace {

struct ResultFile {
  std::string header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

ResultFile read_result(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError(p.string(), 0, "cannot open result file");
  ResultFile f;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (f.header.empty()) {
      f.header = line;
      continue;
    }
    auto cells = split(line);
    if (cells.size() != split(f.header).size())
      throw ConfigError(p.string(), lineno, "row width differs from the header");
    f.rows.push_back(std::move(cells));
  }
  if (f.header.empty() || f.rows.empty()) throw ConfigError(p.string(), lineno ? lineno : 1, "empty result file");
  return f;
}

double parse_number(const std::string& s, const fs::path& p) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(p.string(), 0, "not a number: \"" + s + "\"");
}

}  // namespace

std::string compare_results(const std::vector<fs::path>& files) {
  if (files.empty()) throw ConfigError("compare", 0, "no result files given");
  std::vector<ResultFile> data;
  for (const auto& p : files) {
    data.push_back(read_result(p));
    if (data.back().header != data.front().header)
      throw ConfigError(p.string(), 1, "schema differs from " + files.front().string());
  }
  std::ostringstream out;
  if (data.front().header == "statistic,value") {
    std::vector<std::pair<double, double>> slopes;
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::map<std::string, double> stats;
      for (const auto& row : data[i].rows) stats[row[0]] = parse_number(row[1], files[i]);
      if (!stats.count("beta_hat") || !stats.count("stderr"))
        throw ConfigError(files[i].string(), 1, "fit summary lacks beta_hat/stderr");
      slopes.push_back({stats["beta_hat"], stats["stderr"]});
    }
    out << "file,beta_hat,stderr,diff_vs_first,diff_stderr,z\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double diff = slopes[i].first - slopes[0].first;
      const double se = i ? std::hypot(slopes[i].second, slopes[0].second) : 0.0;
      out << files[i].filename().string() << "," << format_double(slopes[i].first) << ","
          << format_double(slopes[i].second) << "," << format_double(diff) << "," << format_double(se) << ","
          << (se > 0.0 ? format_double(diff / se) : std::string("0")) << "\n";
    }
    return out.str();
  }
  // Generic join: on the first column when it is a key in every file,
  // otherwise by row position.
  const auto head = split(data.front().header);
  bool unique = true;
  for (const auto& f : data) {
    std::map<std::string, int> seen;
    for (const auto& row : f.rows) unique = unique && ++seen[row[0]] == 1;
  }
  out << (unique ? head[0] : std::string("row"));
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t k = unique ? 1 : 0; k < head.size(); ++k) out << "," << head[k] << "@" << i;
  out << "\n";
  std::vector<std::string> keys;
  std::vector<std::map<std::string, std::vector<std::string>>> by_key(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < data[i].rows.size(); ++j) {
      const std::string key = unique ? data[i].rows[j][0] : std::to_string(j);
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
      by_key[i][key] = data[i].rows[j];
    }
  for (const auto& key : keys) {
    out << key;
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto it = by_key[i].find(key);
      for (std::size_t k = unique ? 1 : 0; k < head.size(); ++k)
        out << "," << (it == by_key[i].end() ? "" : it->second[k]);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace filtlab
