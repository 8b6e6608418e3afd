#include "lbr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "lbr/errors.hpp"

namespace lbr {

using nlohmann::json;

namespace {

// Sample-family tags. Every set of replicates drawn by a suite has its own
// family, so suites never share random numbers unless stated.
constexpr std::uint64_t family_simulate = 0;
constexpr std::uint64_t family_marginal = 1;
constexpr std::uint64_t family_stationary_base = 2;
constexpr std::uint64_t family_stationary_lag = 3;  // + lag index
constexpr std::uint64_t family_poisson_pilot = 10;
constexpr std::uint64_t family_poisson = 11;
constexpr std::uint64_t family_zeta_n = 100;
constexpr std::uint64_t family_reference = 200;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string join_times(const std::vector<double>& times) {
  std::string s;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i) s += '|';
    s += format_double(times[i]);
  }
  return s;
}

double bound_horizon(const std::vector<double>& times, double base_step) {
  return std::max(times.back(), base_step);
}

ExceedanceBound make_bound(const ExperimentConfig& config, const MassFunction& alpha, double horizon) {
  RngStream rng(StreamKey{config.seed, StreamDomain::exceedance, 0, 0, 0, 0});
  if (config.exceedance_v)
    return exceedance_bound(config.levy, alpha, horizon, *config.exceedance_v, rng, config.exceedance_paths,
                            config.base_step);
  return default_exceedance_bound(config.levy, alpha, horizon, rng, config.exceedance_paths, config.base_step);
}

double max_cert(const std::vector<MaxIdSample>& samples) {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.error_cert);
  return m;
}

std::vector<double> column(const std::vector<MaxIdSample>& samples, std::size_t k) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.z_values[k]);
  return out;
}

std::size_t index_of(const std::vector<double>& grid, double t) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-12);
  return static_cast<std::size_t>(it - grid.begin());
}

ReportRow bound_row(std::string suite, std::string label, double value, double limit, bool ok, std::size_t n,
                    double significance) {
  ReportRow row;
  row.suite = std::move(suite);
  row.label = std::move(label);
  row.report.statistic = value;
  row.report.p_value = ok ? 1.0 : 0.0;
  row.report.n_a = n;
  row.report.method = TestMethod::bound_check;
  row.report.threshold = significance;
  row.limit = limit;
  return row;
}

json report_json(const ReportRow& r, double p_holm) {
  return json{{"suite", r.suite},
              {"label", r.label},
              {"method", std::string(method_name(r.report.method))},
              {"statistic", r.report.statistic},
              {"p_value", r.report.p_value},
              {"p_holm", p_holm},
              {"n_a", r.report.n_a},
              {"n_b", r.report.n_b},
              {"threshold", r.report.threshold},
              {"limit", r.limit},
              {"reject_raw", r.report.rejects()},
              {"reject_holm", p_holm < r.report.threshold},
              {"error_cert", r.error_cert}};
}

std::vector<double> holm_for(const std::vector<ReportRow>& rows) {
  std::vector<double> p;
  p.reserve(rows.size());
  for (const auto& r : rows) p.push_back(r.report.p_value);
  return holm_adjust(p);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

json base_manifest(const ExperimentConfig& config, const std::string& command) {
  return json{{"command", command},
              {"code_version", code_version},
              {"config_hash", config_hash(config)},
              {"seed", config.seed},
              {"config", config.canonical}};
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void write_timing(const std::string& dir, const std::string& command, double seconds, const Execution& exec) {
  const json timing{{"command", command},
                    {"wall_seconds", seconds},
                    {"threads", exec.mode == Execution::Mode::serial ? 1 : (exec.threads > 0 ? exec.threads
                                                                                              : hardware_threads())}};
  write_text(dir + "/timing.json", timing.dump(2) + "\n");
}

}  // namespace

Execution execution_for(int parallelism) {
  if (parallelism == 1) return Execution::serial();
  return Execution::parallel(parallelism);
}

json PreparedModel::describe() const {
  json j{{"floor", model.floor},
         {"floor_mode", floor_mode},
         {"base_step", model.base_step},
         {"eval_times", model.eval_times},
         {"exceedance",
          {{"v", bound.v},
           {"c_vt", bound.c_vt},
           {"horizon", bound.horizon},
           {"levy_horizon", bound.levy_horizon},
           {"inf_prob", bound.inf_prob},
           {"inf_prob_lower", bound.inf_prob_lower},
           {"exact", bound.exact}}}};
  if (floor_choice)
    j["floor_search"] = {{"u_ref", floor_choice->u_ref},
                         {"certificate", floor_choice->certificate},
                         {"expected_points", floor_choice->expected_points}};
  return j;
}

PreparedModel prepare_model(const ExperimentConfig& config, std::vector<double> eval_times, const Execution& exec) {
  if (eval_times.empty()) eval_times = config.eval_times;
  PreparedModel p;
  p.bound = make_bound(config, config.alpha, bound_horizon(eval_times, config.base_step));
  p.model = MaxIdModel::make(config.levy, config.alpha, std::move(eval_times), config.base_step,
                             config.floor.value_or(-6.0), config.max_points);
  if (config.floor) {
    p.floor_mode = "explicit";
  } else {
    p.floor_mode = "auto";
    p.floor_choice = choose_floor(p.model, p.bound, config.seed, 1e-3, 1000, exec);
    p.model.floor = p.floor_choice->floor;
  }
  return p;
}

PreparedModel prepare_reference(const ExperimentConfig& config, std::vector<double> eval_times) {
  if (eval_times.empty()) eval_times = config.eval_times;
  const MassFunction one = MassFunction::constant(1.0);
  PreparedModel p;
  p.bound = make_bound(config, one, bound_horizon(eval_times, config.base_step));
  p.model = MaxIdModel::make(config.levy, one, std::move(eval_times), config.base_step, config.floor.value_or(-6.0),
                             config.max_points);
  p.floor_mode = config.floor ? "explicit" : "inherited";
  return p;
}

// ---------------------------------------------------------------------------

SuiteResult run_marginal_suite(const ExperimentConfig& config, const SuiteConfig& suite, const Execution& exec) {
  const PreparedModel p = prepare_model(config, config.eval_times, exec);
  const auto samples =
      simulate_replicates(p.model, p.bound, config.seed, family_marginal, 0, suite.replicates, exec);
  const double cert = max_cert(samples);
  const IntensityMeasure& measure = *p.model.measure;
  SuiteResult result{suite.name, {}, json{{"model", p.describe()}, {"max_error_cert", cert}}};
  for (std::size_t k = 0; k < p.model.eval_times.size(); ++k) {
    ReportRow row;
    row.suite = suite.name;
    row.label = "t=" + format_double(p.model.eval_times[k]);
    row.report = ks_one_sample(column(samples, k), [&](double z) { return measure.marginal_cdf(z); },
                               suite.significance);
    row.error_cert = cert;
    result.rows.push_back(std::move(row));
  }
  return result;
}

SuiteResult run_stationarity_suite(const ExperimentConfig& config, const SuiteConfig& suite,
                                   const Execution& exec) {
  std::vector<double> grid = suite.times;
  for (double h : suite.lags)
    for (double t : suite.times) grid.push_back(t + h);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             grid.end());

  const PreparedModel p = prepare_model(config, grid, exec);
  auto project = [&](const std::vector<MaxIdSample>& samples, double shift) {
    PointCloud cloud(suite.times.size());
    std::vector<double> point(suite.times.size());
    for (const auto& s : samples) {
      for (std::size_t i = 0; i < suite.times.size(); ++i)
        point[i] = s.z_values[index_of(p.model.eval_times, suite.times[i] + shift)];
      cloud.push_back(point);
    }
    return cloud;
  };

  const auto base =
      simulate_replicates(p.model, p.bound, config.seed, family_stationary_base, 0, suite.replicates, exec);
  const PointCloud a = project(base, 0.0);
  SuiteResult result{suite.name, {}, json{{"model", p.describe()}}};
  for (std::size_t j = 0; j < suite.lags.size(); ++j) {
    const auto shifted = simulate_replicates(p.model, p.bound, config.seed, family_stationary_lag + j, 0,
                                             suite.replicates, exec);
    ReportRow row;
    row.suite = suite.name;
    row.label = "lag=" + format_double(suite.lags[j]) + " times=" + join_times(suite.times);
    row.report = energy_permutation_test(a, project(shifted, suite.lags[j]), suite.permutations,
                                         StreamKey{config.seed, StreamDomain::permutation, 1, j, 0, 0}, exec,
                                         suite.significance);
    row.error_cert = std::max(max_cert(base), max_cert(shifted));
    result.rows.push_back(std::move(row));
  }
  return result;
}

SuiteResult run_poisson_suite(const ExperimentConfig& config, const SuiteConfig& suite, const Execution& exec) {
  const PreparedModel p = prepare_model(config, config.eval_times, exec);

  // The level: median of the grid supremum of Z in a pilot run, plus an offset.
  const auto pilot = simulate_replicates(p.model, p.bound, config.seed, family_poisson_pilot, 0, suite.pilot, exec);
  std::vector<double> sups;
  for (const auto& s : pilot) sups.push_back(*std::max_element(s.z_values.begin(), s.z_values.end()));
  std::nth_element(sups.begin(), sups.begin() + static_cast<std::ptrdiff_t>(sups.size() / 2), sups.end());
  const double u = sups[sups.size() / 2] + suite.level_offset;

  // Counting needs a floor whose omitted mass at u is below 1e-3.
  double floor = std::floor((u - p.bound.v) / 0.25) * 0.25 - 0.25;
  while (omitted_mass_bound(p.bound, floor, u) >= 1e-3 && floor > -60.0) floor -= 0.25;
  const MaxIdModel counting = p.model.with_floor(floor);

  std::vector<std::uint64_t> counts(suite.replicates);
  for_each_index(suite.replicates, exec, [&](std::size_t r) {
    counts[r] = count_sup_exceedances(counting, p.bound, ReplicateId{config.seed, family_poisson, r, 0}, u);
  });
  const double mean =
      std::accumulate(counts.begin(), counts.end(), 0.0, [](double s, auto c) { return s + static_cast<double>(c); }) /
      static_cast<double>(counts.size());
  const double lambda = lambda_u_bound(p.bound, u);
  const double cert = omitted_mass_bound(p.bound, floor, u);

  SuiteResult result{suite.name, {}, json{{"model", p.describe()}, {"level", u}, {"count_floor", floor},
                                         {"mean_count", mean}, {"lambda_u_bound", lambda}}};
  ReportRow dispersion;
  dispersion.suite = suite.name;
  dispersion.label = "dispersion u=" + format_double(u);
  dispersion.report = poisson_dispersion_test(counts, suite.significance);
  dispersion.error_cert = cert;
  result.rows.push_back(std::move(dispersion));
  ReportRow mean_row = bound_row(suite.name, "mean<=lambda_u u=" + format_double(u), mean, lambda, mean <= lambda,
                                 counts.size(), suite.significance);
  mean_row.error_cert = cert;
  result.rows.push_back(std::move(mean_row));
  return result;
}

SuiteResult run_clock_identity_suite(const ExperimentConfig& config, const SuiteConfig& suite,
                                     const Execution& exec) {
  const double h = suite.clock_step;
  const MassFunction& alpha = config.alpha;
  const double horizon = config.horizon;
  std::vector<double> coarse(suite.replicates);
  std::vector<double> fine(suite.replicates);
  for_each_index(suite.replicates, exec, [&](std::size_t i) {
    RngStream rng(StreamKey{config.seed, StreamDomain::auxiliary, 40, i, 0, 0});
    const double x = -3.0 + 6.0 * rng.uniform();
    const double t = horizon * rng.uniform();
    const LevyPath path = sample_path(config.levy, horizon / alpha.lower() + 2.0 * h, h, rng);
    coarse[i] = std::abs(invert_clock(compute_clock(path, alpha, x), t) - clock_by_integral_rep(path, alpha, x, t, h));
    const LevyPath refined = refine_path(path, config.levy, rng);
    fine[i] = std::abs(invert_clock(compute_clock(refined, alpha, x), t) -
                       clock_by_integral_rep(refined, alpha, x, t, 0.5 * h));
  });
  const double max_coarse = *std::max_element(coarse.begin(), coarse.end());
  const double max_fine = *std::max_element(fine.begin(), fine.end());
  const double tolerance = 5.0 * h * alpha.upper() / (alpha.lower() * alpha.lower());
  // Discrepancies at rounding level carry no order information.
  const bool halves = max_fine <= 0.5 * max_coarse || max_coarse < 1e-12;

  SuiteResult result{suite.name, {}, json{{"step", h}, {"max_discrepancy", max_coarse},
                                         {"max_discrepancy_half_step", max_fine}, {"tolerance", tolerance},
                                         {"ratio", max_fine > 0.0 ? max_coarse / max_fine : 0.0}}};
  result.rows.push_back(bound_row(suite.name, "max|diff| h=" + format_double(h), max_coarse, tolerance,
                                  max_coarse < tolerance, suite.replicates, suite.significance));
  result.rows.push_back(bound_row(suite.name, "halving h=" + format_double(h), max_fine, 0.5 * max_coarse, halves,
                                  suite.replicates, suite.significance));
  return result;
}

SuiteResult run_suite(const ExperimentConfig& config, const SuiteConfig& suite, const Execution& exec) {
  if (suite.name == "marginal") return run_marginal_suite(config, suite, exec);
  if (suite.name == "stationarity") return run_stationarity_suite(config, suite, exec);
  if (suite.name == "poisson-counts") return run_poisson_suite(config, suite, exec);
  if (suite.name == "clock-identity") return run_clock_identity_suite(config, suite, exec);
  throw InvalidArgument("unknown suite " + suite.name);
}

// ---------------------------------------------------------------------------

MdaResult run_mda(const ExperimentConfig& config, const Execution& exec) {
  const MdaConfig& m = config.mda;
  MdaResult result;
  const PreparedModel p = prepare_model(config, m.times, exec);
  ExperimentConfig ref_config = config;
  ref_config.floor = p.model.floor;
  const PreparedModel ref = prepare_reference(ref_config, m.times);

  MdaRoute route = MdaRoute::direct;
  if (m.route == "copies" || (m.route == "auto" && config.alpha.is_identity())) route = MdaRoute::copies;
  result.route = route == MdaRoute::copies ? "copies" : "direct";

  const auto reference =
      simulate_replicates(ref.model, ref.bound, config.seed, family_reference, 0, m.replicates, exec);
  PointCloud b(m.times.size());
  for (const auto& s : reference) b.push_back(s.z_values);
  const double ref_cert = max_cert(reference);

  const std::string tuple_id = join_times(m.times);
  for (std::size_t n : m.ladder) {
    const auto zs = zeta_n_replicates(p.model, p.bound, n, route, config.seed, family_zeta_n, 0, m.replicates, exec);
    PointCloud a(m.times.size());
    double cert = ref_cert;
    for (const auto& z : zs) {
      a.push_back(z.values);
      cert = std::max(cert, z.error_cert);
    }
    ConvergenceRow row;
    row.n = n;
    row.tuple_id = tuple_id;
    row.report = energy_permutation_test(a, b, m.permutations, StreamKey{config.seed, StreamDomain::permutation, 2, n, 0, 0},
                                         exec, m.significance);
    row.replicates = m.replicates;
    row.error_cert = cert;
    result.rows.push_back(row);
  }

  std::vector<double> p_values;
  for (const auto& r : result.rows) p_values.push_back(r.report.p_value);
  const auto adjusted = holm_adjust(p_values);
  result.strictly_decreasing = true;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    if (adjusted[i] < m.significance) result.any_reject = true;
    if (i > 0 && !(result.rows[i].report.statistic < result.rows[i - 1].report.statistic))
      result.strictly_decreasing = false;
  }
  result.converged = !result.rows.empty() && !(adjusted.back() < m.significance);
  result.passed = result.converged && (config.alpha.is_identity() ? !result.any_reject : result.strictly_decreasing);
  result.details = json{{"model", p.describe()}, {"reference", ref.describe()}, {"route", result.route},
                        {"strictly_decreasing", result.strictly_decreasing}, {"converged", result.converged},
                        {"any_reject_holm", result.any_reject}, {"passed", result.passed}};
  return result;
}

// ---------------------------------------------------------------------------

void write_reports_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  const auto holm = holm_for(rows);
  std::string text = std::string(reports_header) + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    text += r.suite + "," + r.label + "," + std::string(method_name(r.report.method)) + "," +
            format_double(r.report.statistic) + "," + format_double(r.report.p_value) + "," + format_double(holm[i]) +
            "," + std::to_string(r.report.n_a) + "," + std::to_string(r.report.n_b) + "," +
            format_double(r.report.threshold) + "," + format_double(r.limit) + "," +
            (r.report.rejects() ? "1" : "0") + "," + (holm[i] < r.report.threshold ? "1" : "0") + "," +
            format_double(r.error_cert) + "\n";
  }
  write_text(path, text);
}

CommandOutcome cmd_simulate(const ExperimentConfig& config, const std::string& out_dir) {
  const Stopwatch clock;
  const Execution exec = execution_for(config.parallelism);
  std::filesystem::create_directories(out_dir);
  const PreparedModel p = prepare_model(config, config.eval_times, exec);
  const auto samples = simulate_replicates(p.model, p.bound, config.seed, family_simulate, 0, config.replicates, exec);

  std::string text = std::string(samples_header) + "\n";
  double worst = 0.0;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    worst = std::max(worst, samples[r].error_cert);
    for (std::size_t k = 0; k < samples[r].eval_times.size(); ++k)
      text += std::to_string(r) + "," + format_double(samples[r].eval_times[k]) + "," +
              format_double(samples[r].z_values[k]) + "," + format_double(samples[r].error_cert) + "\n";
  }
  CommandOutcome out;
  write_text(out_dir + "/samples.csv", text);
  out.manifest = base_manifest(config, "simulate");
  out.manifest["model"] = p.describe();
  out.manifest["replicates"] = samples.size();
  out.manifest["certificates"] = {{"max", worst}};
  write_text(out_dir + "/manifest.json", out.manifest.dump(2) + "\n");
  write_timing(out_dir, "simulate", clock.seconds(), exec);
  out.files = {"samples.csv", "manifest.json", "timing.json"};
  return out;
}

CommandOutcome cmd_verify(const ExperimentConfig& config, const std::string& out_dir) {
  const Stopwatch clock;
  const Execution exec = execution_for(config.parallelism);
  std::filesystem::create_directories(out_dir);
  std::vector<ReportRow> rows;
  json suites = json::array();
  for (const auto& suite : config.suites) {
    SuiteResult r = run_suite(config, suite, exec);
    suites.push_back(json{{"name", r.name}, {"details", r.details}});
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
  }
  const auto holm = holm_for(rows);
  CommandOutcome out;
  out.manifest = base_manifest(config, "verify");
  json reports = json::array();
  bool reject = false;
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    reports.push_back(report_json(rows[i], holm[i]));
    reject = reject || holm[i] < rows[i].report.threshold;
    worst = std::max(worst, rows[i].error_cert);
  }
  out.manifest["suites"] = suites;
  out.manifest["reports"] = reports;
  out.manifest["certificates"] = {{"max", worst}};
  out.manifest["decision"] = {{"any_reject_holm", reject}};
  write_reports_csv(out_dir + "/reports.csv", rows);
  write_text(out_dir + "/manifest.json", out.manifest.dump(2) + "\n");
  write_timing(out_dir, "verify", clock.seconds(), exec);
  out.files = {"reports.csv", "manifest.json", "timing.json"};
  out.exit_code = reject ? 1 : 0;
  return out;
}

CommandOutcome cmd_mda(const ExperimentConfig& config, const std::string& out_dir) {
  const Stopwatch clock;
  const Execution exec = execution_for(config.parallelism);
  std::filesystem::create_directories(out_dir);
  const MdaResult r = run_mda(config, exec);

  std::string text = std::string(convergence_header) + "\n";
  std::vector<ReportRow> rows;
  for (const auto& c : r.rows) {
    text += std::to_string(c.n) + "," + c.tuple_id + "," + format_double(c.report.statistic) + "," +
            format_double(c.report.p_value) + "," + std::to_string(c.replicates) + "," + format_double(c.error_cert) +
            "\n";
    ReportRow row;
    row.suite = "mda";
    row.label = "n=" + std::to_string(c.n);
    row.report = c.report;
    row.error_cert = c.error_cert;
    rows.push_back(row);
  }
  write_text(out_dir + "/convergence.csv", text);
  write_reports_csv(out_dir + "/reports.csv", rows);

  const auto holm = holm_for(rows);
  CommandOutcome out;
  out.manifest = base_manifest(config, "mda");
  json reports = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) reports.push_back(report_json(rows[i], holm[i]));
  out.manifest["reports"] = reports;
  out.manifest["mda"] = r.details;
  write_text(out_dir + "/manifest.json", out.manifest.dump(2) + "\n");
  write_timing(out_dir, "mda", clock.seconds(), exec);
  out.files = {"convergence.csv", "reports.csv", "manifest.json", "timing.json"};
  out.exit_code = r.passed ? 0 : 1;
  return out;
}

int cmd_report(const std::string& out_dir, std::ostream& out) {
  std::ifstream in(out_dir + "/reports.csv");
  if (!in) throw Error("cannot open " + out_dir + "/reports.csv");
  std::string line;
  std::getline(in, line);
  if (line != reports_header) throw Error("reports.csv has an unexpected header: " + line);
  std::vector<std::vector<std::string>> table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 13) throw Error("reports.csv row has " + std::to_string(cells.size()) + " columns");
    table.push_back(std::move(cells));
  }
  std::vector<double> p;
  for (const auto& row : table) p.push_back(std::stod(row[4]));
  const auto holm = holm_adjust(p);
  int rejections = 0;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-40s %-18s %12s %12s %12s  %s\n", "suite", "label", "method", "statistic",
                "p_raw", "p_holm", "decision");
  out << buf;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double threshold = std::stod(table[i][8]);
    const bool raw = p[i] < threshold;
    const bool adj = holm[i] < threshold;
    rejections += adj ? 1 : 0;
    std::snprintf(buf, sizeof buf, "%-16s %-40s %-18s %12.5g %12.5g %12.5g  %s%s\n", table[i][0].c_str(),
                  table[i][1].c_str(), table[i][2].c_str(), std::stod(table[i][3]), p[i], holm[i],
                  adj ? "REJECT" : "pass", raw && !adj ? " (raw reject)" : "");
    out << buf;
  }
  out << table.size() << " rows, " << rejections << " Holm-adjusted rejections\n";
  return rejections > 0 ? 1 : 0;
}

}  // namespace lbr
