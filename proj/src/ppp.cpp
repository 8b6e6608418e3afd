#include "lbr/ppp.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lbr/errors.hpp"

namespace lbr {
namespace {

constexpr double remainder_tolerance = 1e-12;

}  // namespace

IntensityMeasure::IntensityMeasure(MassFunction alpha) : alpha_(alpha) {
  if (alpha_.is_constant()) return;

  const double deviation = std::max(alpha_.upper() - 1.0, 1.0 - alpha_.lower());
  hi_ = std::max(1.0, std::ceil(std::log(deviation / remainder_tolerance)));
  const auto cells = static_cast<std::size_t>(std::ceil((hi_ - lo_) / step_));
  hi_ = lo_ + static_cast<double>(cells) * step_;

  std::vector<double> tail(cells + 1);
  tail[cells] = std::exp(-hi_);
  auto eta = [this](double x) { return density(x); };
  for (std::size_t k = cells; k-- > 0;) {
    const double a = lo_ + static_cast<double>(k) * step_;
    tail[k] = tail[k + 1] + boost::math::quadrature::gauss_kronrod<double, 21>::integrate(eta, a, a + step_, 0);
  }
  log_tail_.resize(cells + 1);
  log_tail_slope_.resize(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k) {
    const double z = lo_ + static_cast<double>(k) * step_;
    log_tail_[k] = std::log(tail[k]);
    log_tail_slope_[k] = -density(z) / tail[k];
  }
}

double IntensityMeasure::density(double x) const { return alpha_(x) * std::exp(-x); }

double IntensityMeasure::log_tail_table(double z) const {
  const double pos = (z - lo_) / step_;
  auto k = static_cast<std::size_t>(pos);
  if (k >= log_tail_.size() - 1) k = log_tail_.size() - 2;
  const double u = pos - static_cast<double>(k);
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  return h00 * log_tail_[k] + h10 * step_ * log_tail_slope_[k] + h01 * log_tail_[k + 1] +
         h11 * step_ * log_tail_slope_[k + 1];
}

double IntensityMeasure::tail_integral(double z) const {
  if (alpha_.is_constant()) return alpha_(0.0) * std::exp(-z);
  if (z >= hi_) return std::exp(-z);
  if (z >= lo_) return std::exp(log_tail_table(z));
  auto eta = [this](double x) { return density(x); };
  const double extra = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(eta, z, lo_, 15, 1e-14);
  return std::exp(log_tail_.front()) + extra;
}

double IntensityMeasure::marginal_cdf(double z) const { return std::exp(-tail_integral(z)); }

double IntensityMeasure::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("quantile: q must lie in (0, 1)");
  return level_for_mass(-std::log(q));
}

double IntensityMeasure::level_for_mass(double mass) const {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidArgument("level_for_mass: mass must be in (0, inf)");
  if (alpha_.is_constant()) return std::log(alpha_(0.0) / mass);

  // tail is sandwiched between lower*exp(-z) and upper*exp(-z), which brackets
  // the root; safeguarded Newton on log(tail) - log(mass).
  const double target = std::log(mass);
  double lo = std::log(alpha_.lower() / mass);
  double hi = std::log(alpha_.upper() / mass);
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double tail = tail_integral(z);
    const double h = std::log(tail) - target;
    if (h > 0.0) {
      lo = z;
    } else if (h < 0.0) {
      hi = z;
    } else {
      return z;
    }
    const double slope = -density(z) / tail;
    double next = z - h / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - z) < 1e-13) return next;
    z = next;
  }
  return z;
}

PointSet generate_points(const IntensityMeasure& measure, double floor, RngStream& rng, std::size_t max_points) {
  PointSet set;
  set.floor = floor;
  set.truncation_gamma = measure.tail_integral(floor);
  double gamma = 0.0;
  for (;;) {
    gamma += rng.exponential();
    if (gamma > set.truncation_gamma) break;
    if (set.points.size() >= max_points)
      throw BudgetExceeded("more than " + std::to_string(max_points) + " PPP points above floor " +
                           std::to_string(floor) + "; raise the floor");
    double x = std::max(measure.level_for_mass(gamma), floor);
    if (!set.points.empty()) x = std::min(x, set.points.back());
    set.gammas.push_back(gamma);
    set.points.push_back(x);
  }
  return set;
}

}  // namespace lbr
