#include "lbr/clock.hpp"

#include <algorithm>
#include <cmath>

#include "lbr/errors.hpp"

namespace lbr {

MassFunction::MassFunction(Kind kind, double parameter, double shift)
    : kind_(kind), parameter_(parameter), shift_(shift) {
  if (kind_ == Kind::constant) {
    lower_ = upper_ = parameter_;
  } else {
    lower_ = std::min(1.0, 1.0 + parameter_);
    upper_ = std::max(1.0, 1.0 + parameter_);
  }
}

MassFunction MassFunction::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("constant mass function needs 0 < c < inf");
  return MassFunction(Kind::constant, c, 0.0);
}

MassFunction MassFunction::logistic_bump(double a) {
  if (!(a > -1.0) || !std::isfinite(a)) throw InvalidArgument("logistic bump needs a > -1");
  return MassFunction(Kind::logistic_bump, a, 0.0);
}

double MassFunction::operator()(double z) const {
  if (kind_ == Kind::constant) return parameter_;
  const double y = z + shift_;
  if (y > 0.0) {
    const double e = std::exp(-y);
    return 1.0 + parameter_ * e / (1.0 + e);
  }
  return 1.0 + parameter_ / (1.0 + std::exp(y));
}

bool MassFunction::mda_admissible() const {
  return kind_ == Kind::logistic_bump || parameter_ == 1.0;
}

MassFunction MassFunction::shifted(double s) const {
  if (kind_ == Kind::constant) return *this;
  return MassFunction(kind_, parameter_, shift_ + s);
}

// ---------------------------------------------------------------------------

ClockTable compute_clock(const LevyPath& path, const MassFunction& alpha, double x) {
  ClockTable table;
  table.times = path.times;
  table.x = x;
  table.alpha_lo = alpha.lower();
  table.alpha_hi = alpha.upper();
  table.a_values.resize(path.size());
  table.a_values[0] = 0.0;

  if (alpha.kind() == MassFunction::Kind::constant) {
    for (std::size_t k = 1; k < path.size(); ++k) table.a_values[k] = alpha.parameter() * path.times[k];
    return table;
  }

  double from = alpha(path.values[0] + x);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double dt = path.times[k] - path.times[k - 1];
    const double to = alpha(path.left_limit(k) + x);
    table.a_values[k] = table.a_values[k - 1] + 0.5 * (from + to) * dt;
    from = path.jump_marks[k] ? alpha(path.values[k] + x) : to;
  }
  return table;
}

double invert_clock(const ClockTable& table, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("invert_clock: t must be >= 0");
  const auto& a = table.a_values;
  if (t > a.back()) throw HorizonExceeded("clock time beyond the sampled path; extend the path horizon");
  const auto it = std::upper_bound(a.begin(), a.end(), t);
  if (it == a.end()) return table.times.back();
  const auto k = static_cast<std::size_t>(it - a.begin()) - 1;
  const double w = (t - a[k]) / (a[k + 1] - a[k]);
  return table.times[k] + w * (table.times[k + 1] - table.times[k]);
}

std::vector<double> time_change(const LevyPath& path, const ClockTable& table,
                                std::span<const double> eval_times) {
  std::vector<double> out;
  out.reserve(eval_times.size());
  for (double t : eval_times) out.push_back(path.value_at(invert_clock(table, t)) + table.x);
  return out;
}

std::vector<double> time_change(const LevyPath& path, const MassFunction& alpha, double x,
                                std::span<const double> eval_times) {
  return time_change(path, compute_clock(path, alpha, x), eval_times);
}

double clock_by_integral_rep(const LevyPath& path, const MassFunction& alpha, double x, double t,
                             double step) {
  if (!(t >= 0.0)) throw InvalidArgument("clock_by_integral_rep: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (alpha.kind() == MassFunction::Kind::constant) {
    const double s = t / alpha.parameter();
    if (s > path.horizon()) throw HorizonExceeded("clock time beyond the sampled path");
    return s;
  }
  if (step <= 0.0) {
    for (std::size_t k = 1; k < path.size(); ++k) step = std::max(step, path.times[k] - path.times[k - 1]);
  }

  auto rate = [&](double s) {
    if (s > path.horizon()) throw HorizonExceeded("clock time beyond the sampled path");
    return 1.0 / alpha(path.value_at(s) + x);
  };

  const auto steps = static_cast<std::size_t>(std::ceil(t / step - 1e-12));
  double s = 0.0;
  double g = rate(0.0);
  for (std::size_t j = 0; j < steps; ++j) {
    const double dr = (j + 1 == steps) ? t - static_cast<double>(j) * step : step;
    // Implicit trapezoid step, solved by fixed-point iteration.
    double next = s + dr * g;
    double g_next = rate(std::min(next, path.horizon()));
    for (int it = 0; it < 60; ++it) {
      const double candidate = s + 0.5 * dr * (g + g_next);
      const double delta = std::abs(candidate - next);
      next = candidate;
      g_next = rate(next);
      if (delta < 1e-15) break;
    }
    s = next;
    g = g_next;
  }
  return s;
}

}  // namespace lbr
