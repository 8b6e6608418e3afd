// Command-line runner: simulate, verify, mda, report.
//
// Exit codes: 0 pass, 1 statistical rejection, 2 configuration error,
// 3 runtime error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lbr/config.hpp"
#include "lbr/errors.hpp"
#include "lbr/experiment.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<int> parallelism;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed, overrides the config");
  cmd->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--parallelism", c.parallelism, "worker threads, 0 = auto; never changes results")
      ->check(CLI::Range(0, 1024));
}

lbr::ExperimentConfig load(const Common& c) {
  lbr::ExperimentConfig config = lbr::load_config(c.config_path);
  if (c.seed) config.seed = *c.seed;
  if (c.parallelism) config.parallelism = *c.parallelism;
  lbr::refresh_canonical(config);
  return config;
}

void print_files(const lbr::CommandOutcome& outcome, const std::string& dir) {
  for (const auto& f : outcome.files) std::cout << dir << "/" << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-id processes from time-changed Levy particle systems"};
  app.require_subcommand(1);
  Common common;
  std::string report_dir = "out";

  auto* simulate = app.add_subcommand("simulate", "write Z replicates to samples.csv");
  auto* verify = app.add_subcommand("verify", "run the configured acceptance suites");
  auto* mda = app.add_subcommand("mda", "run the max-domain-of-attraction n-ladder");
  auto* report = app.add_subcommand("report", "summarize reports.csv with Holm-adjusted decisions");
  for (auto* cmd : {simulate, verify, mda}) add_common(cmd, common);
  report->add_option("--out", report_dir, "directory holding reports.csv")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (report->parsed()) return lbr::cmd_report(report_dir, std::cout);
    const lbr::ExperimentConfig config = load(common);
    lbr::CommandOutcome outcome;
    if (simulate->parsed()) outcome = lbr::cmd_simulate(config, common.out_dir);
    if (verify->parsed()) {
      outcome = lbr::cmd_verify(config, common.out_dir);
      lbr::cmd_report(common.out_dir, std::cout);
    }
    if (mda->parsed()) {
      outcome = lbr::cmd_mda(config, common.out_dir);
      lbr::cmd_report(common.out_dir, std::cout);
      std::cout << "verdict: " << (outcome.exit_code == 0 ? "pass" : "fail") << " "
                << outcome.manifest["mda"].dump() << "\n";
    }
    print_files(outcome, common.out_dir);
    return outcome.exit_code;
  } catch (const lbr::ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
}
