#include "lbr/mda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "lbr/errors.hpp"

namespace lbr {

RescaledSample zeta_n(std::span<const MaxIdSample> copies) {
  if (copies.empty()) throw InvalidArgument("zeta_n needs at least one copy");
  RescaledSample out;
  out.n = copies.size();
  out.eval_times = copies.front().eval_times;
  out.values.assign(out.eval_times.size(), -std::numeric_limits<double>::infinity());
  double worst = 0.0;
  for (const auto& copy : copies) {
    if (copy.eval_times != out.eval_times) throw GridMismatch("zeta_n: copies live on different grids");
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = std::max(out.values[k], copy.z_values[k]);
    worst = std::max(worst, copy.error_cert);
  }
  const double log_n = std::log(static_cast<double>(out.n));
  for (double& v : out.values) v -= log_n;
  out.error_cert = -std::expm1(static_cast<double>(out.n) * std::log1p(-std::min(worst, 1.0)));
  if (worst >= 1.0) out.error_cert = 1.0;
  return out;
}

double rescaled_intensity(const MassFunction& alpha, std::size_t n, double x) {
  if (n < 1) throw InvalidArgument("rescaled_intensity: n must be >= 1");
  return alpha(x + std::log(static_cast<double>(n))) * std::exp(-x);
}

double rescaled_tail_gap(const MassFunction& alpha, std::size_t n, double z) {
  if (n < 1) throw InvalidArgument("rescaled_tail_gap: n must be >= 1");
  if (alpha.is_constant()) return (alpha(0.0) - 1.0) * std::exp(-z);
  const double s = std::log(static_cast<double>(n));
  auto f = [&](double y) { return (alpha(z + y + s) - 1.0) * std::exp(-(z + y)); };
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

std::vector<double> rescaled_process_sample(const LevySpec& spec, const MassFunction& alpha, std::size_t n,
                                            double x, std::span<const double> eval_times, double base_step,
                                            RngStream& rng) {
  if (n < 1) throw InvalidArgument("rescaled_process_sample: n must be >= 1");
  if (eval_times.empty()) throw InvalidArgument("rescaled_process_sample: empty grid");
  const double log_n = std::log(static_cast<double>(n));
  const double horizon = eval_times.back() / alpha.lower() + base_step;
  const LevyPath path = sample_path(spec, horizon, base_step, rng);
  auto out = time_change(path, alpha, x + log_n, eval_times);
  for (double& v : out) v -= log_n;
  return out;
}

MaxIdModel rescaled_model(const MaxIdModel& model, std::size_t n) {
  if (n < 1) throw InvalidArgument("rescaled_model: n must be >= 1");
  const MassFunction shifted = model.alpha.shifted(std::log(static_cast<double>(n)));
  return MaxIdModel::make(model.spec, shifted, model.eval_times, model.base_step, model.floor, model.max_points);
}

MaxIdModel reference_model(const MaxIdModel& model) {
  return MaxIdModel::make(model.spec, MassFunction::constant(1.0), model.eval_times, model.base_step, model.floor,
                          model.max_points);
}

std::vector<RescaledSample> zeta_n_replicates(const MaxIdModel& model, const ExceedanceBound& bound, std::size_t n,
                                              MdaRoute route, std::uint64_t seed, std::uint64_t family,
                                              std::uint64_t first, std::size_t count, const Execution& exec) {
  if (n < 1) throw InvalidArgument("zeta_n_replicates: n must be >= 1");
  std::vector<RescaledSample> out(count);
  const double log_n = std::log(static_cast<double>(n));

  if (route == MdaRoute::direct) {
    const MaxIdModel rescaled = rescaled_model(model, n);
    for_each_index(count, exec, [&](std::size_t r) {
      MaxIdSample z = simulate_max_id(rescaled, bound, ReplicateId{seed, family, first + r, 0});
      out[r] = RescaledSample{n, std::move(z.eval_times), std::move(z.z_values), z.error_cert};
    });
    return out;
  }

  const MaxIdModel per_copy = model.with_floor(model.floor + log_n);
  for_each_index(count, exec, [&](std::size_t r) {
    RescaledSample s;
    s.n = n;
    s.eval_times = model.eval_times;
    s.values.assign(model.eval_times.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < n; ++k) {
      const auto z = try_simulate_max_id(per_copy, bound, ReplicateId{seed, family, first + r, k});
      if (!z) continue;
      for (std::size_t j = 0; j < s.values.size(); ++j) s.values[j] = std::max(s.values[j], z->z_values[j]);
    }
    const double u = *std::min_element(s.values.begin(), s.values.end());
    if (!std::isfinite(u)) throw EmptySystem("all copies empty; lower the floor");
    for (double& v : s.values) v -= log_n;
    // Each copy omits starts below floor + log n; n of them together have the
    // rate of the direct route at the rescaled level.
    const double per = omitted_mass_bound(bound, per_copy.floor, u);
    s.error_cert = per >= 1.0 ? 1.0 : -std::expm1(static_cast<double>(n) * std::log1p(-per));
    out[r] = std::move(s);
  });
  return out;
}

}  // namespace lbr
