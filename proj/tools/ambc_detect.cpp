// ambc-detect: run detector experiments from a JSON config and write CSV results.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ambc/config.hpp"
#include "ambc/errors.hpp"
#include "ambc/experiment.hpp"

namespace fs = std::filesystem;
using namespace ambc;

namespace {

cli::ExperimentConfig load_or_default(const std::string& path) {
  return path.empty() ? cli::default_config() : cli::load_config(path);
}

int run(const std::string& config_path, std::optional<std::uint64_t> seed, unsigned jobs, unsigned threads,
        std::optional<std::uint64_t> trials, const std::string& out_dir, bool gnuplot) {
  cli::ExperimentConfig cfg = load_or_default(config_path);
  if (seed) cfg.seed = seed;
  if (trials) cfg.trials = *trials;
  cfg.validate();
  if (!cfg.seed) throw ConfigError("seed", "a seed is required: set \"seed\" in the config or pass --seed");

  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());

  const auto rows = cli::run_experiment(cfg, {jobs, threads});

  const fs::path csv = dir / cfg.output_name();
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + csv.string() + "' for writing");
    cli::write_csv(rows, out);
    if (!out) throw std::runtime_error("write to '" + csv.string() + "' failed");
  }
  std::cerr << "wrote " << csv.string() << " (" << rows.size() << " rows)\n";

  if (gnuplot) {
    fs::path gp = csv;
    gp.replace_extension(".gp");
    std::ofstream out(gp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + gp.string() + "' for writing");
    cli::write_gnuplot(cfg, csv.filename().string(), out);
    std::cerr << "wrote " << gp.string() << "\n";
  }

  int failed = 0;
  for (const auto& r : rows)
    if (!r.ok()) {
      ++failed;
      std::cerr << "point " << r.sweep << " / " << r.detector << ": " << r.flag << "\n";
    }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ambient backscatter detector experiments (TED, IED, JCED)"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed, trials;
  unsigned jobs = 1, threads = 0;
  bool gnuplot = false;

  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  run_cmd->add_option("--config,-c", config_path, "JSON config (defaults apply to missing keys)");
  run_cmd->add_option("--seed", seed, "Master seed; overrides the config");
  run_cmd->add_option("--trials", trials, "Monte Carlo trials per point; overrides the config")->check(CLI::PositiveNumber);
  run_cmd->add_option("--jobs,-j", jobs, "Sweep points evaluated concurrently")->check(CLI::PositiveNumber);
  run_cmd->add_option("--threads", threads, "Trial threads per point (0 = all cores)");
  run_cmd->add_option("--out,-o", out_dir, "Output directory");
  run_cmd->add_flag("--gnuplot", gnuplot, "Also write a gnuplot script next to the CSV");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a config file and print it with defaults filled in");
  validate_cmd->add_option("--config,-c", validate_path, "JSON config")->required();

  std::string defaults_experiment = "pd_vs_ps";
  auto* defaults_cmd = app.add_subcommand("defaults", "Print the default config");
  defaults_cmd->add_option("--experiment,-e", defaults_experiment, "Experiment whose defaults to print");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      // With several points in flight, one trial thread per point unless asked otherwise.
      const unsigned per_point = threads ? threads : (jobs > 1 ? 1u : 0u);
      return run(config_path, seed, jobs, per_point, trials, out_dir, gnuplot);
    }
    if (*validate_cmd) {
      const auto cfg = cli::load_config(validate_path);
      std::cout << cli::serialize(cfg);
      if (!cfg.seed) std::cerr << "note: no seed set; `run` will need --seed\n";
      return 0;
    }
    if (*defaults_cmd) {
      std::cout << cli::serialize(cli::default_config(cli::experiment_from_string(defaults_experiment)));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
