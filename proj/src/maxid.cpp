#include "lbr/maxid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "lbr/errors.hpp"

namespace lbr {

MaxIdModel MaxIdModel::make(const LevySpec& spec, const MassFunction& alpha, std::vector<double> eval_times,
                            double base_step, double floor, std::size_t max_points) {
  if (eval_times.empty()) throw InvalidArgument("evaluation grid is empty");
  for (std::size_t k = 0; k < eval_times.size(); ++k) {
    if (!(eval_times[k] >= 0.0) || !std::isfinite(eval_times[k]))
      throw InvalidArgument("evaluation times must be finite and >= 0");
    if (k > 0 && eval_times[k] < eval_times[k - 1]) throw InvalidArgument("evaluation times must be sorted");
  }
  if (!(base_step > 0.0)) throw InvalidArgument("base_step must be > 0");
  if (!std::isfinite(floor)) throw InvalidArgument("floor must be finite");
  MaxIdModel m;
  m.spec = spec;
  m.alpha = alpha;
  m.measure = std::make_shared<const IntensityMeasure>(alpha);
  m.eval_times = std::move(eval_times);
  m.base_step = base_step;
  m.floor = floor;
  m.max_points = max_points;
  return m;
}

double MaxIdModel::levy_horizon() const { return eval_horizon() / alpha.lower() + base_step; }

MaxIdModel MaxIdModel::with_floor(double f) const {
  MaxIdModel m = *this;
  m.floor = f;
  return m;
}

StreamKey ReplicateId::points_key() const { return {seed, StreamDomain::points, family, replicate, copy, 0}; }

StreamKey ReplicateId::particle_key(std::size_t particle) const {
  return {seed, StreamDomain::particle, family, replicate, copy, particle};
}

double MaxIdSample::min_value() const { return *std::min_element(z_values.begin(), z_values.end()); }

// ---------------------------------------------------------------------------

namespace {

/// Levy times at which a constant clock c reads the evaluation times.
std::vector<double> constant_clock_grid(const MaxIdModel& model) {
  const double c = model.alpha.parameter();
  std::vector<double> grid{0.0};
  for (double t : model.eval_times) {
    const double s = t / c;
    if (s > grid.back()) grid.push_back(s);
  }
  return grid;
}

std::vector<double> read_constant_clock(const MaxIdModel& model, const LevyPath& path, double x) {
  const double c = model.alpha.parameter();
  std::vector<double> out;
  out.reserve(model.eval_times.size());
  for (double t : model.eval_times) out.push_back(path.value_at(t / c) + x);
  return out;
}

}  // namespace

std::vector<double> particle_trajectory(const MaxIdModel& model, double x, RngStream& rng) {
  if (model.alpha.kind() == MassFunction::Kind::constant) {
    const auto grid = constant_clock_grid(model);
    if (grid.size() == 1) return std::vector<double>(model.eval_times.size(), x);
    return read_constant_clock(model, sample_path_on(model.spec, grid, rng), x);
  }
  const LevyPath path = sample_path(model.spec, model.levy_horizon(), model.base_step, rng);
  return time_change(path, model.alpha, x, model.eval_times);
}

ParticleSystem build_particle_system(const MaxIdModel& model, const ReplicateId& id) {
  ParticleSystem system;
  RngStream point_rng(id.points_key());
  system.starts = generate_points(*model.measure, model.floor, point_rng, model.max_points);
  system.eval_times = model.eval_times;
  system.spec = model.spec;
  system.alpha = model.alpha;
  system.base_step = model.base_step;
  system.paths.reserve(system.starts.size());
  for (std::size_t i = 0; i < system.starts.size(); ++i) {
    RngStream rng(id.particle_key(i));
    system.paths.push_back(particle_trajectory(model, system.starts.points[i], rng));
  }
  return system;
}

// ---------------------------------------------------------------------------

double exceedance_levy_horizon(const MassFunction& alpha, double horizon) {
  return horizon * std::max(alpha.upper(), 1.0 / alpha.lower());
}

ExceedanceBound exceedance_bound(const LevySpec& spec, const MassFunction& alpha, double horizon, double v,
                                 RngStream& rng, std::size_t paths, double base_step) {
  if (!(v > 0.0)) throw InvalidArgument("exceedance_bound: v must be > 0");
  if (!(horizon > 0.0)) throw InvalidArgument("exceedance_bound: horizon must be > 0");
  ExceedanceBound b;
  b.v = v;
  b.horizon = horizon;
  b.levy_horizon = exceedance_levy_horizon(alpha, horizon);
  b.alpha_hi = alpha.upper();
  b.spec = spec;

  if (spec.is_zero()) {
    b.inf_prob = b.inf_prob_lower = 1.0;
  } else if (!spec.has_jumps()) {
    b.inf_prob = b.inf_prob_lower = bm_infimum_probability(spec.drift(), spec.sigma(), b.levy_horizon, v);
  } else {
    // Conditional Monte Carlo: given the grid values, the Brownian pieces are
    // independent bridges, whose probability of staying above -v is closed form.
    if (paths < 2) throw InvalidArgument("exceedance_bound: need at least 2 Monte Carlo paths");
    b.exact = false;
    const double var_rate = spec.sigma() * spec.sigma();
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
      const LevyPath path = sample_path(spec, b.levy_horizon, base_step, rng);
      double survive = 1.0;
      for (std::size_t k = 1; k < path.size() && survive > 0.0; ++k) {
        const double from = path.values[k - 1] + v;
        const double to = path.left_limit(k) + v;
        if (from < 0.0 || to < 0.0 || path.values[k] + v < 0.0) {
          survive = 0.0;
        } else if (var_rate > 0.0) {
          const double dt = path.times[k] - path.times[k - 1];
          survive *= -std::expm1(-2.0 * from * to / (var_rate * dt));
        }
      }
      sum += survive;
      sum_sq += survive * survive;
    }
    const double n = static_cast<double>(paths);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    b.inf_prob = mean;
    b.inf_prob_lower = mean - 2.3263478740408408 * std::sqrt(var / n);
  }
  if (!(b.inf_prob_lower > 0.0))
    throw VanishingInfimumProb("P[inf L >= -v] is not bounded away from 0 at v = " + std::to_string(v) +
                               "; retry with a larger v");
  b.c_vt = 1.0 / b.inf_prob_lower;
  b.law = std::make_shared<const IncrementLaw>(spec, b.levy_horizon);
  return b;
}

ExceedanceBound default_exceedance_bound(const LevySpec& spec, const MassFunction& alpha, double horizon,
                                         RngStream& rng, std::size_t paths, double base_step) {
  std::unique_ptr<ExceedanceBound> last;
  for (double v : {1.0, 2.0, 4.0, 8.0}) {
    try {
      auto b = exceedance_bound(spec, alpha, horizon, v, rng, paths, base_step);
      if (b.inf_prob >= 0.2) return b;
      last = std::make_unique<ExceedanceBound>(std::move(b));
    } catch (const VanishingInfimumProb&) {
    }
  }
  if (last) return *last;
  throw VanishingInfimumProb("no v in {1,2,4,8} gives a positive infimum probability");
}

double lemma_bound(const ExceedanceBound& b, double u, double x) {
  if (!(u - x > b.v)) throw InvalidArgument("lemma_bound requires u - x > v");
  return std::min(1.0, b.c_vt * b.law->tail_upper(u - x - b.v));
}

double lambda_u_bound(const ExceedanceBound& b, double u) {
  return b.alpha_hi * (b.c_vt * std::exp(b.v - u) + std::exp(-(u - b.v)));
}

double omitted_mass_bound(const ExceedanceBound& b, double floor, double u) {
  if (!(u - floor > b.v)) return 1.0;
  const double log_strike = u - b.v - floor;
  if (log_strike > 700.0) return 0.0;
  const double rate = b.alpha_hi * b.c_vt * std::exp(b.v - u) * b.law->call_upper(std::exp(log_strike));
  return std::clamp(-std::expm1(-rate), 0.0, 1.0);
}

// ---------------------------------------------------------------------------

MaxIdSample truncated_max(const ParticleSystem& system, const ExceedanceBound& bound) {
  if (system.paths.empty()) throw EmptySystem("no PPP point above the floor; lower the floor and regenerate");
  MaxIdSample out;
  out.eval_times = system.eval_times;
  out.z_values.assign(system.eval_times.size(), -std::numeric_limits<double>::infinity());
  for (const auto& path : system.paths)
    for (std::size_t k = 0; k < path.size(); ++k) out.z_values[k] = std::max(out.z_values[k], path[k]);
  out.floor = system.starts.floor;
  out.particles = system.paths.size();
  out.error_cert = omitted_mass_bound(bound, out.floor, out.min_value());
  return out;
}

std::size_t sup_exceedance_count(const ParticleSystem& system, double u, const ExceedanceBound& bound) {
  const double margin = omitted_mass_bound(bound, system.starts.floor, u);
  if (!(margin < 1e-3))
    throw TruncationBias("floor " + std::to_string(system.starts.floor) + " too high for level " +
                         std::to_string(u) + " (omitted-mass bound " + std::to_string(margin) + ")");
  std::size_t count = 0;
  for (const auto& path : system.paths)
    if (*std::max_element(path.begin(), path.end()) >= u) ++count;
  return count;
}

MaxIdSample simulate_max_id(const MaxIdModel& model, const ExceedanceBound& bound, const ReplicateId& id) {
  auto out = try_simulate_max_id(model, bound, id);
  if (!out) throw EmptySystem("no PPP point above the floor; lower the floor and regenerate");
  return std::move(*out);
}

std::optional<MaxIdSample> try_simulate_max_id(const MaxIdModel& model, const ExceedanceBound& bound,
                                               const ReplicateId& id) {
  RngStream point_rng(id.points_key());
  const PointSet starts = generate_points(*model.measure, model.floor, point_rng, model.max_points);
  if (starts.empty()) return std::nullopt;

  const bool constant_clock = model.alpha.kind() == MassFunction::Kind::constant;
  const std::vector<double> clock_grid = constant_clock ? constant_clock_grid(model) : std::vector<double>{};

  MaxIdSample out;
  out.eval_times = model.eval_times;
  out.z_values.assign(model.eval_times.size(), -std::numeric_limits<double>::infinity());
  out.floor = model.floor;
  out.particles = starts.size();
  double running_min = -std::numeric_limits<double>::infinity();

  auto absorb = [&](const std::vector<double>& x_path) {
    for (std::size_t k = 0; k < x_path.size(); ++k) out.z_values[k] = std::max(out.z_values[k], x_path[k]);
    running_min = out.min_value();
  };

  for (std::size_t i = 0; i < starts.size(); ++i) {
    const double x = starts.points[i];
    RngStream rng(id.particle_key(i));
    if (constant_clock) {
      if (clock_grid.size() == 1) {
        absorb(std::vector<double>(model.eval_times.size(), x));
      } else {
        absorb(read_constant_clock(model, sample_path_on(model.spec, clock_grid, rng), x));
      }
      continue;
    }
    const LevyPath path = sample_path(model.spec, model.levy_horizon(), model.base_step, rng);
    // X_t(x) - x is read off the path by interpolation, so it never exceeds
    // the path's grid maximum: such a particle cannot raise Z anywhere.
    if (i > 0 && x + path.running_max() < running_min) continue;
    absorb(time_change(path, model.alpha, x, model.eval_times));
  }
  out.error_cert = omitted_mass_bound(bound, out.floor, out.min_value());
  return out;
}

std::size_t count_sup_exceedances(const MaxIdModel& model, const ExceedanceBound& bound, const ReplicateId& id,
                                  double u) {
  const double margin = omitted_mass_bound(bound, model.floor, u);
  if (!(margin < 1e-3))
    throw TruncationBias("floor " + std::to_string(model.floor) + " too high for level " + std::to_string(u) +
                         " (omitted-mass bound " + std::to_string(margin) + ")");
  RngStream point_rng(id.points_key());
  const PointSet starts = generate_points(*model.measure, model.floor, point_rng, model.max_points);
  const bool constant_clock = model.alpha.kind() == MassFunction::Kind::constant;
  const std::vector<double> clock_grid = constant_clock ? constant_clock_grid(model) : std::vector<double>{};
  std::size_t count = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const double x = starts.points[i];
    RngStream rng(id.particle_key(i));
    std::vector<double> x_path;
    if (constant_clock) {
      x_path = clock_grid.size() == 1 ? std::vector<double>(model.eval_times.size(), x)
                                      : read_constant_clock(model, sample_path_on(model.spec, clock_grid, rng), x);
    } else {
      const LevyPath path = sample_path(model.spec, model.levy_horizon(), model.base_step, rng);
      if (x + path.running_max() < u) continue;
      x_path = time_change(path, model.alpha, x, model.eval_times);
    }
    if (*std::max_element(x_path.begin(), x_path.end()) >= u) ++count;
  }
  return count;
}

std::vector<MaxIdSample> simulate_replicates(const MaxIdModel& model, const ExceedanceBound& bound,
                                             std::uint64_t seed, std::uint64_t family, std::uint64_t first,
                                             std::size_t count, const Execution& exec) {
  std::vector<MaxIdSample> out(count);
  for_each_index(count, exec, [&](std::size_t r) {
    out[r] = simulate_max_id(model, bound, ReplicateId{seed, family, first + r, 0});
  });
  return out;
}

std::vector<MaxIdSample> simulate_replicates_reference(const MaxIdModel& model, const ExceedanceBound& bound,
                                                       std::uint64_t seed, std::uint64_t family,
                                                       std::uint64_t first, std::size_t count) {
  std::vector<MaxIdSample> out;
  out.reserve(count);
  for (std::size_t r = 0; r < count; ++r)
    out.push_back(truncated_max(build_particle_system(model, ReplicateId{seed, family, first + r, 0}), bound));
  return out;
}

FloorChoice choose_floor(const MaxIdModel& model, const ExceedanceBound& bound, std::uint64_t seed, double target,
                         std::size_t pilot_replicates, const Execution& exec) {
  if (pilot_replicates < 1000) throw InvalidArgument("choose_floor: the 0.1% quantile needs >= 1000 pilots");
  constexpr std::uint64_t pilot_family = 0x9170;
  const MaxIdModel pilot = model.with_floor(-4.0);
  std::vector<double> minima(pilot_replicates);
  for_each_index(pilot_replicates, exec, [&](std::size_t r) {
    const ReplicateId id{seed ^ 0x5eedf100dULL, pilot_family, r, 0};
    minima[r] = simulate_max_id(pilot, bound, id).min_value();
  });
  std::sort(minima.begin(), minima.end());

  FloorChoice choice;
  choice.u_ref = minima[static_cast<std::size_t>(0.001 * static_cast<double>(pilot_replicates))];
  double f = std::floor((choice.u_ref - bound.v) / 0.25) * 0.25;
  if (f >= choice.u_ref - bound.v) f -= 0.25;
  while (omitted_mass_bound(bound, f, choice.u_ref) >= target && f > -60.0) f -= 0.25;
  choice.floor = f;
  choice.certificate = omitted_mass_bound(bound, f, choice.u_ref);
  choice.expected_points = model.measure->tail_integral(f);
  if (choice.expected_points > static_cast<double>(model.max_points))
    throw BudgetExceeded("automatic floor " + std::to_string(f) + " implies " +
                         std::to_string(choice.expected_points) + " expected points, above max_points");
  return choice;
}

}  // namespace lbr
