#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbr/clock.hpp"
#include "lbr/levy.hpp"

namespace lbr {

/// One acceptance suite run by `verify`. Fields a suite does not use keep
/// their defaults.
struct SuiteConfig {
  std::string name;  ///< marginal | stationarity | poisson-counts | clock-identity
  std::size_t replicates = 10'000;
  double significance = 0.01;
  std::size_t permutations = 1000;
  std::vector<double> times{0.0, 0.25, 0.5, 1.0};  ///< stationarity base times
  std::vector<double> lags{0.25, 0.5};
  double level_offset = 2.0;     ///< poisson-counts: u = median sup + offset
  double clock_step = 1e-3;      ///< clock-identity base step
  std::size_t pilot = 1000;      ///< poisson-counts pilot replicates for the median
};

struct MdaConfig {
  std::vector<std::size_t> ladder{1, 10, 100, 1000};
  std::size_t replicates = 5000;
  std::size_t permutations = 1000;
  std::vector<double> times{0.2, 0.5, 1.0, 2.0};
  double significance = 0.01;
  std::string route = "auto";  ///< direct | copies | auto (copies iff alpha = 1)
};

struct ExperimentConfig {
  LevySpec levy;
  MassFunction alpha = MassFunction::constant(1.0);
  double horizon = 2.0;
  double base_step = 0.01;
  std::vector<double> eval_times{0.0, 0.5, 1.0, 2.0};
  std::optional<double> floor;  ///< empty = automatic pilot search
  std::size_t max_points = 1'000'000;
  std::optional<double> exceedance_v;  ///< empty = smallest admissible v in {1,2,4,8}
  std::size_t exceedance_paths = 100'000;
  std::size_t replicates = 10;  ///< simulate
  std::vector<SuiteConfig> suites;
  MdaConfig mda;
  std::uint64_t seed = 0;
  int parallelism = 0;  ///< 0 = auto

  /// Normalized document with defaults filled in and parallelism removed;
  /// the config hash is taken over its serialization.
  nlohmann::json canonical;
};

/// Parses and validates a config document. Throws ConfigError whose where()
/// is "line L, column C" for syntax errors and a JSON pointer otherwise.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Re-derives `canonical` after fields were changed (e.g. a --seed override).
void refresh_canonical(ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace lbr
