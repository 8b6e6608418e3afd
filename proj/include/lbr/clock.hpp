#pragma once

#include <span>
#include <vector>

#include "lbr/levy.hpp"

namespace lbr {

/// A continuous mass function with certified bounds
///   0 < lower() <= alpha(z) <= upper() < infinity.
///
/// Two families:
///   constant c:        alpha(z) = c
///   logistic bump a:   alpha(z) = 1 + a / (1 + exp(z + shift)),  a > -1
/// The bump tends to 1 as z -> +inf and to 1 + a as z -> -inf. `shift`
/// is zero for user-facing configs; shifted() produces z -> alpha(z + s),
/// which is how rescaled intensities are represented.
class MassFunction {
 public:
  enum class Kind { constant, logistic_bump };

  static MassFunction constant(double c);
  static MassFunction logistic_bump(double a);

  double operator()(double z) const;

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  double shift() const { return shift_; }

  /// alpha(z) -> 1 as z -> infinity; required for max-domain experiments.
  bool mda_admissible() const;
  bool is_identity() const { return kind_ == Kind::constant && parameter_ == 1.0; }
  bool is_constant() const { return kind_ == Kind::constant || parameter_ == 0.0; }

  MassFunction shifted(double s) const;

 private:
  MassFunction(Kind kind, double parameter, double shift);

  Kind kind_;
  double parameter_;
  double shift_;
  double lower_;
  double upper_;
};

/// Tabulated inverse clock A_x(t) = int_0^t alpha(L_r + x) dr on the grid
/// of the path it was computed from.
struct ClockTable {
  std::vector<double> times;
  std::vector<double> a_values;
  double x = 0.0;
  double alpha_lo = 1.0;
  double alpha_hi = 1.0;

  double max_clock() const { return a_values.back(); }
};

/// Trapezoid rule on each grid interval using the left limit at the right
/// end, so the integrand is the continuous part of the path on every piece.
ClockTable compute_clock(const LevyPath& path, const MassFunction& alpha, double x);

/// T_x(t) = inf{s : A_x(s) > t} by monotone piecewise-linear interpolation.
/// Throws HorizonExceeded when t lies beyond the tabulated clock.
double invert_clock(const ClockTable& table, double t);

/// X_t(x) = L_{T_x(t)} + x at each evaluation time.
std::vector<double> time_change(const LevyPath& path, const MassFunction& alpha, double x,
                                std::span<const double> eval_times);

/// Same, reusing an already computed clock table.
std::vector<double> time_change(const LevyPath& path, const ClockTable& table,
                                std::span<const double> eval_times);

/// Independent computation of T_x(t) through the integral representation
///   T_x(t) = int_0^t 1 / alpha(X_r(x)) dr.
/// X_r depends on T_x(r) itself, so the trapezoid sum is solved implicitly
/// step by step on a uniform grid in clock time. No clock table is used.
/// `step` <= 0 selects the widest gap of the path grid.
double clock_by_integral_rep(const LevyPath& path, const MassFunction& alpha, double x, double t,
                             double step = 0.0);

}  // namespace lbr
