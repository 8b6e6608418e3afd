#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "lbr/rng.hpp"

namespace lbr {

// Jump-size laws with a closed-form exponential moment.
struct ConstantJump {
  double c = 0.0;
};
struct NormalJump {
  double mean = 0.0;
  double sd = 1.0;
};
/// Takes value `a` with probability `p`, otherwise `b`.
struct TwoPointJump {
  double a = 0.0;
  double b = 0.0;
  double p = 0.5;
};
using JumpDist = std::variant<ConstantJump, NormalJump, TwoPointJump>;

/// E[exp(J)]; throws NonIntegrableJumps on an invalid or overflowing law.
double jump_exp_moment(const JumpDist& dist);
double sample_jump(const JumpDist& dist, RngStream& rng);

/// Brownian motion with drift plus compound-Poisson jumps,
///   L_t = drift*t + sigma*W_t + sum_{k <= N_t} J_k,   N ~ Poisson(jump_rate).
///
/// Specs built by make_levy_spec carry the drift that makes psi(1) = 0, i.e.
/// E[exp(L_t)] = 1 for every t. The only way to obtain another drift is
/// with_drift(), which exists for mutation controls and marks the spec as
/// not normalized.
class LevySpec {
 public:
  double sigma() const { return sigma_; }
  double jump_rate() const { return jump_rate_; }
  const JumpDist& jump_dist() const { return jump_dist_; }
  double drift() const { return drift_; }

  bool normalized() const { return normalized_; }
  bool has_jumps() const { return jump_rate_ > 0.0; }
  bool is_zero() const { return sigma_ == 0.0 && jump_rate_ == 0.0 && drift_ == 0.0; }

  /// Laplace exponent at 1: log E[exp(L_1)].
  double psi_one() const;

  /// The constant zero process. Only for tests; make_levy_spec rejects it.
  static LevySpec zero();

  LevySpec with_drift(double drift) const;

 private:
  friend LevySpec make_levy_spec(double sigma, double jump_rate, JumpDist jump_dist);

  double sigma_ = 0.0;
  double jump_rate_ = 0.0;
  JumpDist jump_dist_ = ConstantJump{};
  double drift_ = 0.0;
  bool normalized_ = true;
};

LevySpec make_levy_spec(double sigma, double jump_rate, JumpDist jump_dist = ConstantJump{});

/// E[exp(L_t)]. Exactly 1 for normalized specs.
double exp_moment(const LevySpec& spec, double t);

/// A discretized cadlag path on a non-uniform grid that contains every jump
/// epoch. values[k] is the right-continuous value at times[k]; the left
/// limit there is values[k] - jump_size[k].
struct LevyPath {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<std::uint8_t> jump_marks;
  std::vector<double> jump_sizes;

  std::size_t size() const { return times.size(); }
  double horizon() const { return times.back(); }
  double left_limit(std::size_t k) const { return values[k] - jump_sizes[k]; }

  /// Cadlag evaluation: linear between values[k] and the left limit at
  /// k+1 (exact for the drift part, a bridge interpolation for the Brownian
  /// part), right-continuous at grid points.
  double value_at(double s) const;

  /// Largest value the path attains on the grid, left limits included.
  double running_max() const;

  /// Path without jumps through the given points; for tests and oracles.
  static LevyPath from_values(std::vector<double> times, std::vector<double> values);
};

/// Samples a path on {0, h, 2h, ..., horizon} union the jump epochs in
/// [0, horizon]. Increments are exact Gaussian increments.
LevyPath sample_path(const LevySpec& spec, double horizon, double base_step, RngStream& rng);

/// Same, on an arbitrary strictly increasing grid starting at 0.
LevyPath sample_path_on(const LevySpec& spec, std::span<const double> grid, RngStream& rng);

/// Halves every grid interval by Brownian-bridge midpoint insertion. The
/// result is a finer discretization of the same underlying path.
LevyPath refine_path(const LevyPath& path, const LevySpec& spec, RngStream& rng);

/// Law of L_T as a (truncated) mixture of Gaussians over the jump count,
/// with certified remainders so that the *_upper functions are upper bounds.
class IncrementLaw {
 public:
  IncrementLaw(const LevySpec& spec, double horizon, double tolerance = 1e-15);

  /// Upper bound on P[L_T >= w].
  double tail_upper(double w) const;
  /// Upper bound on E[(exp(L_T) - strike)^+].
  double call_upper(double strike) const;
  /// Mixture mean of exp(L_T) (equals exp_moment up to truncation).
  double exp_mean() const;

 private:
  struct Component {
    double weight;
    double mean;
    double sd;
  };
  std::vector<Component> components_;
  double tail_remainder_ = 0.0;  // P[N > K]
  double call_remainder_ = 0.0;  // E[exp(L_T); N > K]
};

/// P[inf_{s in [0,T]} (drift*s + sigma*W_s) >= -v], by the reflection formula.
double bm_infimum_probability(double drift, double sigma, double horizon, double v);

/// Standard normal distribution function and its complement.
double normal_cdf(double x);
double normal_sf(double x);

}  // namespace lbr
