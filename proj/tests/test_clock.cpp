#include <doctest.h>

#include <cmath>
#include <vector>

#include "lbr/clock.hpp"
#include "lbr/errors.hpp"
#include "support.hpp"

using namespace lbr;

namespace {

LevyPath linear_path(double horizon, double h) {
  std::vector<double> t, v;
  for (double s = 0.0; s < horizon - 1e-12; s += h) t.push_back(s);
  t.push_back(horizon);
  v = t;
  return LevyPath::from_values(t, v);
}

}  // namespace

TEST_SUITE("clock") {
  TEST_CASE("mass function bounds and limits") {
    const auto bump = MassFunction::logistic_bump(1.0);
    CHECK(bump.lower() == 1.0);
    CHECK(bump.upper() == 2.0);
    CHECK(bump(0.0) == doctest::Approx(1.5));
    CHECK(bump(50.0) == doctest::Approx(1.0));
    CHECK(bump(-50.0) == doctest::Approx(2.0));
    const auto dip = MassFunction::logistic_bump(-0.5);
    CHECK(dip.lower() == 0.5);
    CHECK(dip.upper() == 1.0);
    for (double z = -30; z <= 30; z += 0.37) {
      CHECK(dip(z) >= dip.lower());
      CHECK(dip(z) <= dip.upper());
    }
    CHECK(bump.shifted(std::log(10.0))(0.0) == doctest::Approx(1.0 + 1.0 / 11.0));
    CHECK(MassFunction::constant(1.0).is_identity());
    CHECK_THROWS_AS(MassFunction::logistic_bump(-1.0), InvalidArgument);
    CHECK_THROWS_AS(MassFunction::constant(0.0), InvalidArgument);
  }

  TEST_CASE("constant mass gives the linear clock") {
    RngStream rng(StreamKey{21});
    const auto path = sample_path(make_levy_spec(1.0, 0.0), 3.0, 0.01, rng);
    const auto table = compute_clock(path, MassFunction::constant(2.0), 0.3);
    for (std::size_t k = 0; k < path.size(); ++k) CHECK(table.a_values[k] == doctest::Approx(2.0 * path.times[k]));
    CHECK(invert_clock(table, 1.0) == doctest::Approx(0.5));
  }

  TEST_CASE("clock of the identity path against the closed-form integral") {
    // L_r = r, alpha = 1 + 1/(1+e^z): A_0(1) = 2 - log((1+e)/2).
    const double expected = 2.0 - std::log((1.0 + std::exp(1.0)) / 2.0);
    CHECK(expected == doctest::Approx(1.37989).epsilon(1e-5));
    const auto alpha = MassFunction::logistic_bump(1.0);
    const auto table = compute_clock(linear_path(1.5, 1e-3), alpha, 0.0);
    const std::size_t k = 1000;
    CHECK(table.times[k] == doctest::Approx(1.0));
    CHECK(table.a_values[k] == doctest::Approx(expected).epsilon(1e-6));
    // The inverse reads the clock back.
    CHECK(invert_clock(table, expected) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("inverse clock is monotone and bounded by the mass bounds") {
    const auto alpha = MassFunction::logistic_bump(-0.5);
    RngStream rng(StreamKey{22});
    const auto path = sample_path(make_levy_spec(1.0, 1.0, NormalJump{0.0, 0.5}), 6.0, 0.01, rng);
    const auto table = compute_clock(path, alpha, 0.4);
    double previous = 0.0;
    for (double t = 0.0; t <= 2.5; t += 0.01) {
      const double s = invert_clock(table, t);
      CHECK(s >= previous);
      CHECK(s <= t / alpha.lower() + 1e-12);
      CHECK(s >= t / alpha.upper() - 1e-12);
      previous = s;
    }
    CHECK_THROWS_AS(invert_clock(table, table.max_clock() + 1.0), HorizonExceeded);
  }

  TEST_CASE("time change starts at x") {
    const auto alpha = MassFunction::logistic_bump(1.0);
    RngStream rng(StreamKey{23});
    const auto path = sample_path(make_levy_spec(1.0, 0.0), 3.0, 0.01, rng);
    const std::vector<double> times{0.0, 1.0, 2.0};
    const auto x = time_change(path, alpha, -1.25, times);
    CHECK(x[0] == -1.25);
  }

  TEST_CASE("integral representation agrees with the clock table") {
    const auto alpha = MassFunction::logistic_bump(1.0);
    const LevySpec spec = make_levy_spec(1.0, 2.0, TwoPointJump{0.5, -0.5, 0.5});
    for (std::uint64_t i = 0; i < 50; ++i) {
      RngStream rng(StreamKey{24, StreamDomain::auxiliary, i});
      const auto path = sample_path(spec, 2.5, 1e-3, rng);
      const double x = -2.0 + 0.08 * static_cast<double>(i);
      const double t = 0.04 * static_cast<double>(i + 1);
      const double table = invert_clock(compute_clock(path, alpha, x), t);
      CHECK(std::abs(table - clock_by_integral_rep(path, alpha, x, t)) < 5e-3 * alpha.upper());
    }
    CHECK(clock_by_integral_rep(linear_path(1.0, 0.01), alpha, 0.0, 0.0) == 0.0);
  }

  TEST_CASE("integral representation on the identity path") {
    // For L_r = r the clock solves dT/dt = 1/alpha(T); invert the closed form.
    const auto alpha = MassFunction::logistic_bump(1.0);
    const double a1 = 2.0 - std::log((1.0 + std::exp(1.0)) / 2.0);
    CHECK(clock_by_integral_rep(linear_path(2.0, 1e-3), alpha, 0.0, a1) == doctest::Approx(1.0).epsilon(1e-6));
  }
}
