#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "filtlab/cache.hpp"
#include "filtlab/runner.hpp"

using namespace filtlab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "filtlab_runner_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kSmallFit = R"({
  "schema_version": 1,
  "experiment": "scaling-fit",
  "name": "tiny_fit",
  "seed": 7,
  "group": "Z1",
  "walk": {"m": 4, "samples": 24},
  "entropy": {"ns": [1, 2, 3, 4, 5, 6], "epsilons": [0.1, 0.2, 0.3]}
})";

const char* kDyadic = R"({
  "schema_version": 1,
  "experiment": "standardness",
  "name": "dyadic",
  "seed": 1,
  "model": "dyadic",
  "dyadic": {"bits": 4}
})";

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("config errors carry the file and line") {
  try {
    parse_config("{\n  \"schema_version\": 1,\n  \"experiment\": \"standardness\"\n  \"seed\": 1\n}", "bad.json");
    FAIL("malformed JSON accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("bad.json:", 0) == 0);
    CHECK(e.line() == 4);
  }
  const std::string unknown =
      "{\n  \"schema_version\": 1,\n  \"experiment\": \"nope\",\n  \"seed\": 1\n}";
  try {
    parse_config(unknown, "u.json");
    FAIL("unknown experiment accepted");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_config("{\"schema_version\": 2, \"experiment\": \"standardness\", \"seed\": 1}", "v.json"),
                  ConfigError);
}

TEST_CASE("seed override changes the hash and nothing else") {
  const Config a = parse_config(kDyadic, "a.json");
  const Config b = parse_config(kDyadic, "a.json", 1);
  const Config c = parse_config(kDyadic, "a.json", 2);
  CHECK(a.hash == b.hash);
  CHECK(a.hash != c.hash);
  CHECK(c.seed == 2);
  CHECK(c.experiment == a.experiment);
}

TEST_CASE("dyadic standardness output is the closed form") {
  const fs::path dir = fresh_dir("dyadic");
  const auto files = run_experiment(parse_config(kDyadic, "d.json"), {dir, 1, {}, nullptr});
  REQUIRE(!files.empty());
  const std::string text = slurp(files.front());
  CHECK(text.rfind("# filtlab experiment=standardness", 0) == 0);
  // c_n = (bits - n) / (2 bits) for the uniform dyadic space.
  CHECK(text.find("\n2,0.25") != std::string::npos);
}

TEST_CASE("reruns are byte identical across thread counts and with a warm cache") {
  const Config cfg = parse_config(kSmallFit, "fit.json");
  const fs::path cache = fresh_dir("cache");
  const fs::path a = fresh_dir("a"), b = fresh_dir("b"), c = fresh_dir("c");
  const auto fa = run_experiment(cfg, {a, 1, {}, nullptr});
  const auto fb = run_experiment(cfg, {b, 3, cache, nullptr});
  std::ostringstream log;
  const auto fc = run_experiment(cfg, {c, 2, cache, &log});
  REQUIRE(fa.size() == fb.size());
  REQUIRE(fa.size() == fc.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(slurp(fa[i]) == slurp(fb[i]));
    CHECK(slurp(fa[i]) == slurp(fc[i]));
  }
  CHECK(log.str().find("cache hit") != std::string::npos);
}

TEST_CASE("cache keys are checked on every hit") {
  const fs::path dir = fresh_dir("cache_keys");
  ResultCache cache(dir);
  const nlohmann::json key = {{"kind", "test"}, {"v", 1}};
  CHECK(!cache.get(key));
  cache.put(key, {{"x", 3}});
  REQUIRE(cache.get(key));
  CHECK(cache.get(key)->at("x") == 3);
  CHECK(cache.hits() == 2);
  CHECK(!cache.get({{"kind", "test"}, {"v", 2}}));
  CHECK(json_hash(key) == json_hash(nlohmann::json::parse(R"({"v":1,"kind":"test"})")));
  CHECK(!ResultCache().enabled());
}

TEST_CASE("compare joins fit summaries and rejects mismatched schemas") {
  const fs::path dir = fresh_dir("compare");
  const auto write = [&](const std::string& name, const std::string& body) {
    atomic_write(dir / name, body);
    return dir / name;
  };
  const auto f1 = write("a.csv", "# x\nstatistic,value\nbeta_hat,0.5\nstderr,0.03\n");
  const auto f2 = write("b.csv", "# y\nstatistic,value\nbeta_hat,0.9\nstderr,0.04\n");
  const std::string out = compare_results({f1, f2});
  CHECK(out.find("diff_vs_first") != std::string::npos);
  // (0.9 - 0.5) / sqrt(0.03^2 + 0.04^2) = 8
  CHECK(out.find(",8\n") != std::string::npos);
  const auto other = write("c.csv", "n,rho\n1,0.5\n");
  CHECK_THROWS_AS(compare_results({f1, other}), ConfigError);
  CHECK_THROWS_AS(compare_results({f1, write("e.csv", "")}), ConfigError);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.25) == "0.25");
}

}  // TEST_SUITE
