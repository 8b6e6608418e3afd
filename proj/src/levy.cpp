#include "lbr/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lbr/errors.hpp"

namespace lbr {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double jump_exp_moment(const JumpDist& dist) {
  const double m = std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantJump>) {
          return std::exp(d.c);
        } else if constexpr (std::is_same_v<T, NormalJump>) {
          if (!(d.sd >= 0.0)) throw NonIntegrableJumps("normal jump sd must be >= 0");
          return std::exp(d.mean + 0.5 * d.sd * d.sd);
        } else {
          if (!(d.p >= 0.0 && d.p <= 1.0)) throw NonIntegrableJumps("two-point jump p must lie in [0,1]");
          return d.p * std::exp(d.a) + (1.0 - d.p) * std::exp(d.b);
        }
      },
      dist);
  if (!std::isfinite(m)) throw NonIntegrableJumps("E[exp(J)] is not finite");
  return m;
}

double sample_jump(const JumpDist& dist, RngStream& rng) {
  return std::visit(
      [&rng](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantJump>) {
          return d.c;
        } else if constexpr (std::is_same_v<T, NormalJump>) {
          return d.mean + d.sd * rng.normal();
        } else {
          return rng.uniform() < d.p ? d.a : d.b;
        }
      },
      dist);
}

double LevySpec::psi_one() const {
  const double m = has_jumps() ? jump_exp_moment(jump_dist_) : 1.0;
  return 0.5 * sigma_ * sigma_ + drift_ + jump_rate_ * (m - 1.0);
}

LevySpec LevySpec::zero() { return LevySpec{}; }

LevySpec LevySpec::with_drift(double drift) const {
  LevySpec out = *this;
  out.drift_ = drift;
  out.normalized_ = (drift == drift_) && normalized_;
  return out;
}

LevySpec make_levy_spec(double sigma, double jump_rate, JumpDist jump_dist) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be finite and >= 0");
  if (!(jump_rate >= 0.0) || !std::isfinite(jump_rate))
    throw InvalidArgument("jump_rate must be finite and >= 0");
  const double m = jump_exp_moment(jump_dist);
  if (sigma == 0.0 && jump_rate == 0.0)
    throw DegenerateModel("sigma = 0 and jump_rate = 0 gives the zero process");
  LevySpec spec;
  spec.sigma_ = sigma;
  spec.jump_rate_ = jump_rate;
  spec.jump_dist_ = jump_dist;
  spec.drift_ = -0.5 * sigma * sigma - jump_rate * (m - 1.0);
  spec.normalized_ = true;
  return spec;
}

double exp_moment(const LevySpec& spec, double t) {
  if (t < 0.0) throw InvalidArgument("exp_moment: t must be >= 0");
  if (spec.normalized()) return 1.0;
  return std::exp(t * spec.psi_one());
}

// ---------------------------------------------------------------------------

double LevyPath::value_at(double s) const {
  if (!(s >= 0.0) || s > horizon()) throw HorizonExceeded("path evaluated outside [0, horizon]");
  const auto it = std::upper_bound(times.begin(), times.end(), s);
  const auto k = static_cast<std::size_t>(it - times.begin()) - 1;
  if (k + 1 == times.size() || s == times[k]) return values[k];
  const double w = (s - times[k]) / (times[k + 1] - times[k]);
  return values[k] + w * (left_limit(k + 1) - values[k]);
}

double LevyPath::running_max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k) m = std::max({m, values[k], left_limit(k)});
  return m;
}

LevyPath LevyPath::from_values(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.empty())
    throw InvalidArgument("from_values: times and values must be non-empty and equally long");
  LevyPath p;
  p.jump_marks.assign(times.size(), 0);
  p.jump_sizes.assign(times.size(), 0.0);
  p.times = std::move(times);
  p.values = std::move(values);
  return p;
}

LevyPath sample_path_on(const LevySpec& spec, std::span<const double> grid, RngStream& rng) {
  if (grid.empty() || grid.front() != 0.0) throw InvalidArgument("path grid must start at 0");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw InvalidArgument("path grid must be strictly increasing");
  const double horizon = grid.back();

  std::vector<double> epochs;
  std::vector<double> sizes;
  if (spec.has_jumps()) {
    double t = rng.exponential() / spec.jump_rate();
    while (t <= horizon) {
      epochs.push_back(t);
      sizes.push_back(sample_jump(spec.jump_dist(), rng));
      t += rng.exponential() / spec.jump_rate();
    }
  }

  LevyPath path;
  if (epochs.empty()) {
    path.times.assign(grid.begin(), grid.end());
    path.jump_marks.assign(grid.size(), 0);
    path.jump_sizes.assign(grid.size(), 0.0);
  } else {
    const std::size_t n = grid.size() + epochs.size();
    path.times.reserve(n);
    path.jump_marks.reserve(n);
    path.jump_sizes.reserve(n);
    std::size_t g = 0;
    std::size_t e = 0;
    while (g < grid.size() || e < epochs.size()) {
      if (e < epochs.size() && (g == grid.size() || epochs[e] <= grid[g])) {
        if (g < grid.size() && epochs[e] == grid[g]) ++g;
        path.times.push_back(epochs[e]);
        path.jump_marks.push_back(1);
        path.jump_sizes.push_back(sizes[e]);
        ++e;
      } else {
        path.times.push_back(grid[g]);
        path.jump_marks.push_back(0);
        path.jump_sizes.push_back(0.0);
        ++g;
      }
    }
  }

  const std::size_t n = path.times.size();
  path.values.resize(n);
  path.values[0] = 0.0;
  double continuous = 0.0;
  double jumps = 0.0;
  const double sigma = spec.sigma();
  const double drift = spec.drift();
  // Most steps share one length; reuse its standard deviation.
  double last_dt = -1.0;
  double sd = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double dt = path.times[k] - path.times[k - 1];
    continuous += drift * dt;
    if (sigma > 0.0) {
      if (dt != last_dt) {
        last_dt = dt;
        sd = sigma * std::sqrt(dt);
      }
      continuous += sd * rng.normal();
    }
    jumps += path.jump_sizes[k];
    path.values[k] = continuous + jumps;
  }
  return path;
}

LevyPath sample_path(const LevySpec& spec, double horizon, double base_step, RngStream& rng) {
  if (!(horizon > 0.0)) throw InvalidArgument("sample_path: horizon must be > 0");
  if (!(base_step > 0.0)) throw InvalidArgument("sample_path: base_step must be > 0");
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / base_step - 1e-9));
  std::vector<double> grid;
  grid.reserve(steps + 1);
  for (std::size_t k = 0; k < steps; ++k) grid.push_back(static_cast<double>(k) * base_step);
  grid.push_back(horizon);
  return sample_path_on(spec, grid, rng);
}

LevyPath refine_path(const LevyPath& path, const LevySpec& spec, RngStream& rng) {
  LevyPath out;
  const std::size_t n = 2 * path.size() - 1;
  out.times.reserve(n);
  out.values.reserve(n);
  out.jump_marks.reserve(n);
  out.jump_sizes.reserve(n);
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k > 0) {
      const double dt = path.times[k] - path.times[k - 1];
      const double from = path.values[k - 1];
      const double to = path.left_limit(k);
      double mid = 0.5 * (from + to);
      if (spec.sigma() > 0.0) mid += spec.sigma() * std::sqrt(0.25 * dt) * rng.normal();
      out.times.push_back(path.times[k - 1] + 0.5 * dt);
      out.values.push_back(mid);
      out.jump_marks.push_back(0);
      out.jump_sizes.push_back(0.0);
    }
    out.times.push_back(path.times[k]);
    out.values.push_back(path.values[k]);
    out.jump_marks.push_back(path.jump_marks[k]);
    out.jump_sizes.push_back(path.jump_sizes[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

/// Poisson(mean) probabilities for k = 0..kmax, computed in log space.
std::vector<double> poisson_pmf(double mean, std::size_t kmax) {
  std::vector<double> pmf(kmax + 1, 0.0);
  if (mean == 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double kd = static_cast<double>(k);
    pmf[k] = std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
  }
  return pmf;
}

double log_binomial(std::size_t k, std::size_t j) {
  return std::lgamma(static_cast<double>(k) + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
         std::lgamma(static_cast<double>(k - j) + 1.0);
}

}  // namespace

IncrementLaw::IncrementLaw(const LevySpec& spec, double horizon, double tolerance) {
  if (!(horizon >= 0.0)) throw InvalidArgument("IncrementLaw: horizon must be >= 0");
  const double base_mean = spec.drift() * horizon;
  const double base_var = spec.sigma() * spec.sigma() * horizon;
  const double count_mean = spec.jump_rate() * horizon;
  const double m = spec.has_jumps() ? jump_exp_moment(spec.jump_dist()) : 1.0;
  const double tilted_mean = count_mean * m;
  const double total_exp = std::exp(horizon * spec.psi_one());

  // Truncation point covering both the plain and the exp-tilted count law.
  const double big = std::max(count_mean, tilted_mean);
  const auto kmax = static_cast<std::size_t>(std::ceil(big + 40.0 * std::sqrt(big) + 60.0));
  const auto plain = poisson_pmf(count_mean, kmax);
  const auto tilted = poisson_pmf(tilted_mean, kmax);
  std::vector<double> plain_sf(kmax + 2, 0.0);
  std::vector<double> tilted_sf(kmax + 2, 0.0);
  for (std::size_t k = kmax + 1; k-- > 0;) {
    plain_sf[k] = plain_sf[k + 1] + plain[k];
    tilted_sf[k] = tilted_sf[k + 1] + tilted[k];
  }
  std::size_t cutoff = 0;
  while (cutoff < kmax && (plain_sf[cutoff + 1] > tolerance || tilted_sf[cutoff + 1] > tolerance)) ++cutoff;
  tail_remainder_ = plain_sf[cutoff + 1];
  call_remainder_ = total_exp * tilted_sf[cutoff + 1];

  for (std::size_t k = 0; k <= cutoff; ++k) {
    if (plain[k] == 0.0) continue;
    const double kd = static_cast<double>(k);
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, ConstantJump>) {
            components_.push_back({plain[k], base_mean + kd * d.c, std::sqrt(base_var)});
          } else if constexpr (std::is_same_v<T, NormalJump>) {
            components_.push_back({plain[k], base_mean + kd * d.mean, std::sqrt(base_var + kd * d.sd * d.sd)});
          } else {
            for (std::size_t j = 0; j <= k; ++j) {
              double w = 0.0;
              if (d.p == 1.0) {
                w = j == k ? 1.0 : 0.0;
              } else if (d.p == 0.0) {
                w = j == 0 ? 1.0 : 0.0;
              } else {
                w = std::exp(log_binomial(k, j) + static_cast<double>(j) * std::log(d.p) +
                             static_cast<double>(k - j) * std::log1p(-d.p));
              }
              if (w == 0.0) continue;
              const double jd = static_cast<double>(j);
              components_.push_back({plain[k] * w, base_mean + jd * d.a + (kd - jd) * d.b, std::sqrt(base_var)});
            }
          }
        },
        spec.jump_dist());
  }
}

double IncrementLaw::tail_upper(double w) const {
  double p = tail_remainder_;
  for (const auto& c : components_) {
    if (c.sd > 0.0) {
      p += c.weight * normal_sf((w - c.mean) / c.sd);
    } else if (c.mean >= w) {
      p += c.weight;
    }
  }
  return std::min(p, 1.0);
}

double IncrementLaw::call_upper(double strike) const {
  if (!(strike > 0.0)) throw InvalidArgument("call_upper: strike must be > 0");
  const double log_strike = std::log(strike);
  double value = call_remainder_;
  for (const auto& c : components_) {
    if (c.sd > 0.0) {
      const double d2 = (c.mean - log_strike) / c.sd;
      const double d1 = d2 + c.sd;
      const double term = std::exp(c.mean + 0.5 * c.sd * c.sd) * normal_cdf(d1) - strike * normal_cdf(d2);
      value += c.weight * std::max(term, 0.0);
    } else {
      value += c.weight * std::max(std::exp(c.mean) - strike, 0.0);
    }
  }
  return value;
}

double IncrementLaw::exp_mean() const {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight * std::exp(c.mean + 0.5 * c.sd * c.sd);
  return m;
}

double bm_infimum_probability(double drift, double sigma, double horizon, double v) {
  if (!(v >= 0.0)) throw InvalidArgument("bm_infimum_probability: v must be >= 0");
  if (horizon == 0.0) return 1.0;
  if (sigma == 0.0) return std::min(0.0, drift * horizon) >= -v ? 1.0 : 0.0;
  const double s = sigma * std::sqrt(horizon);
  const double first = normal_cdf((v + drift * horizon) / s);
  const double tail = normal_cdf((-v + drift * horizon) / s);
  const double second = tail > 0.0 ? std::exp(-2.0 * drift * v / (sigma * sigma) + std::log(tail)) : 0.0;
  return std::clamp(first - second, 0.0, 1.0);
}

}  // namespace lbr
