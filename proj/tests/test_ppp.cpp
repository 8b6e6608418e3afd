#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "lbr/errors.hpp"
#include "lbr/ppp.hpp"
#include "lbr/stats.hpp"
#include "support.hpp"

using namespace lbr;

namespace {

// Closed form of int_z^inf (1 + a/(1+e^x)) e^{-x} dx.
double bump_tail(double a, double z) { return (1.0 + a) * std::exp(-z) - a * std::log1p(std::exp(-z)); }

}  // namespace

TEST_SUITE("ppp") {
  TEST_CASE("tail integral matches the closed form and an independent quadrature") {
    CHECK(bump_tail(1.0, 0.0) == doctest::Approx(2.0 - std::log(2.0)));
    CHECK(bump_tail(1.0, 0.0) == doctest::Approx(1.306853).epsilon(1e-6));
    for (double a : {1.0, -0.5, 3.0}) {
      const IntensityMeasure m(MassFunction::logistic_bump(a));
      for (double z : {-45.0, -12.3, -3.0, -0.5, 0.0, 0.7, 2.0, 9.0, 35.0}) {
        CHECK(m.tail_integral(z) == doctest::Approx(bump_tail(a, z)).epsilon(1e-9));
        boost::math::quadrature::exp_sinh<double> q;
        const auto alpha = MassFunction::logistic_bump(a);
        const double numeric = q.integrate([&](double y) { return alpha(z + y) * std::exp(-(z + y)); }, 0.0,
                                           std::numeric_limits<double>::infinity());
        CHECK(m.tail_integral(z) == doctest::Approx(numeric).epsilon(1e-9));
      }
    }
    const IntensityMeasure gumbel(MassFunction::constant(1.0));
    CHECK(gumbel.marginal_cdf(0.3) == doctest::Approx(testing::gumbel_cdf(0.3)));
  }

  TEST_CASE("quantile inverts the marginal distribution") {
    const IntensityMeasure m(MassFunction::logistic_bump(-0.5));
    for (double q : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
      const double z = m.quantile(q);
      CHECK(m.marginal_cdf(z) == doctest::Approx(q).epsilon(1e-8));
    }
    CHECK_THROWS_AS(m.quantile(0.0), InvalidArgument);
    CHECK_THROWS_AS(m.quantile(1.0), InvalidArgument);
  }

  TEST_CASE("points are ordered, above the floor, and Poisson in number") {
    const IntensityMeasure m(MassFunction::logistic_bump(1.0));
    const double floor = -2.0;
    std::vector<std::uint64_t> counts;
    std::vector<double> top;
    for (std::uint64_t r = 0; r < 5000; ++r) {
      RngStream rng(StreamKey{31, StreamDomain::points, r});
      const auto set = generate_points(m, floor, rng);
      for (std::size_t i = 0; i < set.size(); ++i) {
        REQUIRE(set.points[i] >= floor);
        if (i > 0) REQUIRE(set.points[i] <= set.points[i - 1]);
        REQUIRE(set.gammas[i] <= set.truncation_gamma);
      }
      counts.push_back(set.size());
      if (!set.empty()) top.push_back(set.points[0]);
    }
    double mean = 0.0;
    for (auto c : counts) mean += static_cast<double>(c);
    mean /= 5000.0;
    const double expected = bump_tail(1.0, floor);
    CHECK(std::abs(mean - expected) < 4.0 * std::sqrt(expected / 5000.0));
    CHECK_FALSE(poisson_dispersion_test(counts).rejects());
    // The largest point has law exp(-tail(z)) given it lies above the floor.
    const double p_floor = m.marginal_cdf(floor);
    const auto r = ks_one_sample(top, [&](double z) { return (m.marginal_cdf(z) - p_floor) / (1.0 - p_floor); });
    CHECK_FALSE(r.rejects());
  }

  TEST_CASE("point budget is enforced") {
    const IntensityMeasure m(MassFunction::constant(1.0));
    RngStream rng(StreamKey{32});
    CHECK_THROWS_AS(generate_points(m, -10.0, rng, 100), BudgetExceeded);
  }
}
