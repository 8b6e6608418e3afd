#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbr/config.hpp"
#include "lbr/maxid.hpp"
#include "lbr/mda.hpp"
#include "lbr/stats.hpp"

namespace lbr {

inline constexpr const char* code_version = "lbr 0.1.0";

Execution execution_for(int parallelism);

/// One row of reports.csv. Statistical tests carry a p-value; bound checks
/// (method bound_check) carry the measured value in `statistic`, the limit
/// in `limit`, and p-value 1 on success or 0 on failure.
struct ReportRow {
  std::string suite;
  std::string label;
  TestReport report;
  double limit = 0.0;
  double error_cert = 0.0;
};

/// A model ready to simulate, with its truncation floor and exceedance bound.
struct PreparedModel {
  MaxIdModel model;
  ExceedanceBound bound;
  std::string floor_mode;  ///< "explicit" | "auto"
  std::optional<FloorChoice> floor_choice;

  nlohmann::json describe() const;
};

/// Builds the model on `eval_times` (config grid if empty). The bound is taken
/// over the horizon of those times; the floor is the config floor or the
/// automatic pilot choice.
PreparedModel prepare_model(const ExperimentConfig& config, std::vector<double> eval_times, const Execution& exec);

/// Same model with the mass function replaced by alpha = 1 (reference zeta_L).
PreparedModel prepare_reference(const ExperimentConfig& config, std::vector<double> eval_times);

struct SuiteResult {
  std::string name;
  std::vector<ReportRow> rows;
  nlohmann::json details;
};

SuiteResult run_marginal_suite(const ExperimentConfig& config, const SuiteConfig& suite, const Execution& exec);
SuiteResult run_stationarity_suite(const ExperimentConfig& config, const SuiteConfig& suite, const Execution& exec);
SuiteResult run_poisson_suite(const ExperimentConfig& config, const SuiteConfig& suite, const Execution& exec);
SuiteResult run_clock_identity_suite(const ExperimentConfig& config, const SuiteConfig& suite,
                                     const Execution& exec);
SuiteResult run_suite(const ExperimentConfig& config, const SuiteConfig& suite, const Execution& exec);

/// One rung of the n-ladder.
struct ConvergenceRow {
  std::size_t n = 1;
  std::string tuple_id;
  TestReport report;
  std::size_t replicates = 0;
  double error_cert = 0.0;
};

struct MdaResult {
  std::vector<ConvergenceRow> rows;
  std::string route;
  bool strictly_decreasing = false;
  bool converged = false;  ///< the last rung does not reject (Holm-adjusted)
  bool any_reject = false;
  bool passed = false;
  nlohmann::json details;
};

MdaResult run_mda(const ExperimentConfig& config, const Execution& exec);

/// Outcome of a subcommand: the files it wrote and its exit code.
struct CommandOutcome {
  int exit_code = 0;
  std::vector<std::string> files;
  nlohmann::json manifest;
};

/// simulate: samples.csv (replicate,t,Z,error_cert), manifest.json, timing.json.
CommandOutcome cmd_simulate(const ExperimentConfig& config, const std::string& out_dir);
/// verify: reports.csv, manifest.json, timing.json. Exit 1 iff a Holm-adjusted decision rejects.
CommandOutcome cmd_verify(const ExperimentConfig& config, const std::string& out_dir);
/// mda: convergence.csv, reports.csv, manifest.json, timing.json.
CommandOutcome cmd_mda(const ExperimentConfig& config, const std::string& out_dir);
/// report: reads reports.csv in out_dir and prints raw and Holm-adjusted decisions.
int cmd_report(const std::string& out_dir, std::ostream& out);

/// reports.csv layout, with Holm-adjusted p-values over all rows.
inline constexpr const char* reports_header =
    "suite,label,method,statistic,p_value,p_holm,n_a,n_b,threshold,limit,reject_raw,reject_holm,error_cert";
inline constexpr const char* samples_header = "replicate,t,Z,error_cert";
inline constexpr const char* convergence_header = "n,tuple_id,statistic,p_value,N,error_cert";

void write_reports_csv(const std::string& path, const std::vector<ReportRow>& rows);

}  // namespace lbr
