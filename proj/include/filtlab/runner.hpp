#pragma once

// Config-driven experiment runner behind the command line tool.
//
// A config is a JSON object with "schema_version": 1, an "experiment" kind,
// a master "seed" and the sections that kind needs; docs/config_schema.md
// lists them. Every output starts with a comment line carrying the config
// hash and the seed, and contains nothing time- or thread-dependent.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace filtlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Invalid config or input file; what() starts with "<file>:<line>: ".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& file, std::size_t line, const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Config {
  std::string source;  // file name used in messages
  std::string text;
  nlohmann::json doc;
  std::string experiment;
  std::string name;
  std::uint64_t seed = 0;
  std::string hash;  // of the document with the effective seed
};

Config parse_config(const std::string& text, const std::string& source,
                    std::optional<std::uint64_t> seed_override = std::nullopt);
Config load_config(const std::filesystem::path& path,
                   std::optional<std::uint64_t> seed_override = std::nullopt);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  std::filesystem::path cache_dir;  // empty: no cache
  std::ostream* log = nullptr;      // progress messages when set
};

// Runs the experiment and returns the files written. Throws ConfigError for
// config problems found late (caps, grid sizes) and library exceptions for
// runtime failures.
std::vector<std::filesystem::path> run_experiment(const Config& config, const RunOptions& opt);

// Joins result files that share a header. Fit summaries additionally get
// slope differences against the first file with combined standard errors.
// Returns CSV text; throws ConfigError on empty files or schema mismatch.
std::string compare_results(const std::vector<std::filesystem::path>& files);

// Shortest round-trip decimal form used in every CSV.
std::string format_double(double v);

}  // namespace filtlab
