// filtlab: run experiments from JSON configs and compare their results.
//
//   filtlab run [--config] FILE [--out-dir DIR] [--seed N] [--threads T]
//               [--cache-dir DIR] [--verbose]
//   filtlab compare FILE... [--out-dir DIR]
//
// Exit codes: 0 success, 2 config or input error, 3 runtime error.

#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "filtlab/cache.hpp"
#include "filtlab/runner.hpp"

int main(int argc, char** argv) {
  using namespace filtlab;
  CLI::App app{"Scaled entropy of filtrations: experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string cache_dir;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  auto* cfg_opt = run->add_option("--config", config_path, "Experiment config (JSON)");
  run->add_option("config_file", config_path, "Experiment config (JSON)")->excludes(cfg_opt);
  run->add_option("--out-dir", out_dir, "Directory for result files");
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--threads", threads, "Worker threads (0: hardware concurrency)");
  run->add_option("--cache-dir", cache_dir, "Content-addressed cache directory");
  run->add_flag("--verbose", verbose, "Progress messages on stderr");

  std::vector<std::string> files;
  auto* cmp = app.add_subcommand("compare", "Join result files and difference fitted slopes");
  cmp->add_option("files", files, "Result CSV files")->required();
  cmp->add_option("--out-dir", out_dir, "Write compare.csv here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      if (config_path.empty()) {
        std::cerr << "run: a config file is required\n";
        return kExitConfig;
      }
      if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
      const Config config = load_config(config_path, seed);
      RunOptions opt;
      opt.out_dir = out_dir;
      opt.threads = threads;
      opt.cache_dir = cache_dir;
      if (verbose) opt.log = &std::cerr;
      for (const auto& f : run_experiment(config, opt)) std::cout << f.string() << "\n";
    } else {
      std::vector<std::filesystem::path> paths(files.begin(), files.end());
      const std::string report = compare_results(paths);
      if (cmp->count("--out-dir")) {
        const auto path = std::filesystem::path(out_dir) / "compare.csv";
        atomic_write(path, report);
        std::cout << path.string() << "\n";
      } else {
        std::cout << report;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
