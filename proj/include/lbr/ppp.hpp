#pragma once

#include <cstddef>
#include <vector>

#include "lbr/clock.hpp"
#include "lbr/rng.hpp"

namespace lbr {

/// The intensity eta(x) = alpha(x) exp(-x) dx on the real line.
///
/// The tail integral int_z^inf eta is tabulated once at construction: the
/// table runs on a uniform z-grid up to the switch-over point M, where the
/// remainder int_M^inf eta is replaced by exp(-M) with certified error
/// max(upper-1, 1-lower) * exp(-M) < 1e-12. Each table cell is integrated
/// with Gauss-Kronrod, and lookups use cubic Hermite interpolation of
/// log(tail) with exact derivatives. Constant mass functions bypass the
/// table (the tail is c*exp(-z)).
class IntensityMeasure {
 public:
  explicit IntensityMeasure(MassFunction alpha);

  const MassFunction& alpha() const { return alpha_; }
  double density(double x) const;
  double switch_point() const { return hi_; }

  /// int_z^inf alpha(x) exp(-x) dx.
  double tail_integral(double z) const;
  /// F(z) = exp(-tail_integral(z)).
  double marginal_cdf(double z) const;
  /// F^{<-}(q) for q in (0, 1), to 1e-10 in x.
  double quantile(double q) const;
  /// The level x with tail_integral(x) = mass; quantile(exp(-mass)).
  double level_for_mass(double mass) const;

 private:
  double log_tail_table(double z) const;

  MassFunction alpha_;
  double lo_ = -40.0;
  double hi_ = 0.0;
  double step_ = 1.0 / 128.0;
  std::vector<double> log_tail_;
  std::vector<double> log_tail_slope_;
};

/// Ordered PPP sample U(1) >= U(2) >= ... obtained as F^{<-}(exp(-Gamma_i))
/// from the jump times Gamma_1 < Gamma_2 < ... of a unit Poisson process.
struct PointSet {
  std::vector<double> gammas;
  std::vector<double> points;
  double floor = 0.0;
  /// tail_integral(floor); generation stops at the first Gamma beyond it.
  double truncation_gamma = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

inline constexpr std::size_t default_max_points = 1'000'000;

/// All PPP points >= floor. Throws BudgetExceeded if more than max_points
/// would be produced.
PointSet generate_points(const IntensityMeasure& measure, double floor, RngStream& rng,
                         std::size_t max_points = default_max_points);

}  // namespace lbr
