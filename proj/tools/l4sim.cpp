// l4sim: run experiment matrices and derive the Prague deployment table.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "l4sim/expcli/config.hpp"
#include "l4sim/expcli/matrix.hpp"
#include "l4sim/expcli/recommend.hpp"

namespace {

using namespace l4sim::expcli;

constexpr int kExitConfig = 1;
constexpr int kExitTrial = 2;

std::string default_out_dir() {
  if (const char* env = std::getenv("L4SIM_OUT_DIR"); env && *env) return env;
  return "results";
}

MatrixConfig load(const std::string& config, bool paper) {
  if (paper) return paper_replication_config();
  return load_matrix_config(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L4S coexistence experiment runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment matrix and write results.csv");
  std::string config;
  bool paper = false;
  std::string out;
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed_base;
  std::optional<std::uint32_t> trials;
  bool timeseries = false;
  bool quiet = false;
  auto* cfg_opt = run->add_option("--config", config, "YAML matrix config")->check(CLI::ExistingFile);
  auto* paper_opt = run->add_flag("--paper-replication", paper, "use the built-in replication grid");
  cfg_opt->excludes(paper_opt);
  run->add_option("--out", out, "output directory (default $L4SIM_OUT_DIR or ./results)");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--seed-base", seed_base, "trial k uses seed base + k");
  run->add_option("--trials", trials, "seeds per cell")->check(CLI::PositiveNumber);
  run->add_flag("--timeseries", timeseries, "write per-flow time series");
  run->add_flag("-q,--quiet", quiet, "no per-trial progress");

  auto* rec = app.add_subcommand("recommend", "derive the deployment table from results.csv");
  std::string in_dir;
  double fair_lo = 0.35;
  rec->add_option("--in", in_dir, "directory holding results.csv")->required();
  rec->add_option("--fair-lo", fair_lo, "minimum share either flow must keep")->check(CLI::Range(0.0, 0.5));

  auto* list = app.add_subcommand("list-scenarios", "print the cell ids of a matrix");
  std::string list_config;
  list->add_option("--config", list_config, "YAML matrix config (default: replication grid)")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (config.empty() && !paper) {
        std::cerr << "run: one of --config or --paper-replication is required\n";
        return kExitConfig;
      }
      MatrixConfig cfg = load(config, paper);
      if (jobs) cfg.jobs = *jobs;
      if (seed_base) cfg.seed_base = *seed_base;
      if (trials) cfg.trials = *trials;
      if (timeseries) cfg.timeseries = true;
      const std::filesystem::path dir = !out.empty() ? out : !cfg.out_dir.empty() ? cfg.out_dir : default_out_dir();
      std::function<void(const std::string&)> log;
      if (!quiet) log = [](const std::string& line) { std::cerr << line << '\n'; };
      const auto outcome = run_matrix(cfg, dir, log);
      std::cout << cfg.name << ": " << outcome.cells << " cells, " << outcome.rows.size() << " rows -> "
                << (dir / "results.csv").string() << '\n';
      if (outcome.failed_trials > 0) {
        for (const auto& f : outcome.failures) std::cerr << "trial failed: " << f << '\n';
        return kExitTrial;
      }
      return 0;
    }
    if (*rec) {
      const auto path = std::filesystem::path(in_dir) / "results.csv";
      std::ifstream is(path);
      if (!is) {
        std::cerr << "cannot open " << path.string() << '\n';
        return kExitConfig;
      }
      print_recommendation(std::cout, recommend(read_results(is), fair_lo));
      return 0;
    }
    if (*list) {
      const MatrixConfig cfg = list_config.empty() ? paper_replication_config() : load_matrix_config(list_config);
      for (const auto& c : expand_cells(cfg)) std::cout << c.id << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CsvError& e) {
    std::cerr << "results error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTrial;
  }
  return 0;
}
