#include <doctest.h>

#include <cmath>
#include <vector>

#include "lbr/errors.hpp"
#include "lbr/mda.hpp"
#include "lbr/stats.hpp"
#include "support.hpp"

using namespace lbr;

namespace {

MaxIdSample sample_of(std::vector<double> times, std::vector<double> z, double cert) {
  MaxIdSample s;
  s.eval_times = std::move(times);
  s.z_values = std::move(z);
  s.error_cert = cert;
  return s;
}

// int_z^inf (1 + a/(1+e^{x+s})) e^{-x} dx - e^{-z} in closed form.
double bump_gap(double a, double s, double z) {
  const double y = std::exp(-(z + s));
  return a * std::exp(s) * (y - std::log1p(y));
}

ExceedanceBound bound_for(const LevySpec& spec, const MassFunction& alpha, double horizon) {
  RngStream rng(StreamKey{61});
  return default_exceedance_bound(spec, alpha, horizon, rng, 5000, 0.05);
}

}  // namespace

TEST_SUITE("mda") {
  TEST_CASE("zeta_n of one copy is the copy") {
    const std::vector<MaxIdSample> one{sample_of({0, 1}, {0.3, -0.2}, 0.01)};
    const auto z = zeta_n(one);
    CHECK(z.values == std::vector<double>{0.3, -0.2});
    CHECK(z.error_cert == doctest::Approx(0.01));
  }

  TEST_CASE("zeta_n is associative in blocks") {
    RngStream rng(StreamKey{62});
    std::vector<MaxIdSample> copies;
    for (int k = 0; k < 12; ++k) copies.push_back(sample_of({0, 1, 2}, {rng.normal(), rng.normal(), rng.normal()}, 0.0));
    const auto direct = zeta_n(copies);
    std::vector<MaxIdSample> blocks;
    for (int b = 0; b < 3; ++b) {
      const auto block = zeta_n(std::span<const MaxIdSample>(copies).subspan(4 * b, 4));
      blocks.push_back(sample_of(block.eval_times, block.values, block.error_cert));
    }
    const auto nested = zeta_n(blocks);
    for (std::size_t k = 0; k < 3; ++k) CHECK(nested.values[k] == doctest::Approx(direct.values[k]));
    CHECK(zeta_n(copies).error_cert == 0.0);
  }

  TEST_CASE("zeta_n certificate and grid checks") {
    const std::vector<MaxIdSample> copies{sample_of({0, 1}, {0, 0}, 0.1), sample_of({0, 1}, {0, 0}, 0.2)};
    CHECK(zeta_n(copies).error_cert == doctest::Approx(1.0 - 0.8 * 0.8));
    const std::vector<MaxIdSample> bad{sample_of({0, 1}, {0, 0}, 0.0), sample_of({0, 2}, {0, 0}, 0.0)};
    CHECK_THROWS_AS(zeta_n(bad), GridMismatch);
  }

  TEST_CASE("rescaled intensity") {
    const auto one = MassFunction::constant(1.0);
    const auto bump = MassFunction::logistic_bump(1.0);
    for (std::size_t n : {1, 10, 1000}) {
      CHECK(rescaled_intensity(one, n, 0.7) == doctest::Approx(std::exp(-0.7)));
      CHECK(rescaled_intensity(bump, n, 0.0) == doctest::Approx(1.0 + 1.0 / (1.0 + static_cast<double>(n))));
    }
  }

  TEST_CASE("rescaled tail gap matches the closed form and shrinks with n") {
    const auto bump = MassFunction::logistic_bump(1.0);
    for (double z : {-2.0, 0.0, 2.0}) {
      double previous = 1e300;
      for (std::size_t n : {1, 10, 100, 1000}) {
        const double gap = rescaled_tail_gap(bump, n, z);
        CHECK(gap == doctest::Approx(bump_gap(1.0, std::log(static_cast<double>(n)), z)).epsilon(1e-10));
        CHECK(std::abs(gap) < previous);
        previous = std::abs(gap);
      }
    }
    CHECK(rescaled_tail_gap(MassFunction::constant(1.0), 100, 0.5) == 0.0);
  }

  TEST_CASE("rescaled process is L + x without perturbation") {
    const LevySpec spec = make_levy_spec(1.0, 1.0, NormalJump{0.0, 0.3});
    const std::vector<double> times{0.0, 0.5, 1.0};
    for (std::size_t n : {1, 100}) {
      RngStream a(StreamKey{63});
      RngStream b(StreamKey{63});
      const auto xs = rescaled_process_sample(spec, MassFunction::constant(1.0), n, 0.4, times, 0.01, a);
      const auto path = sample_path(spec, 1.0 + 0.01, 0.01, b);
      for (std::size_t k = 0; k < times.size(); ++k)
        CHECK(xs[k] == doctest::Approx(path.value_at(times[k]) + 0.4).epsilon(1e-12));
    }
  }

  TEST_CASE("rescaled process approaches L in law") {
    const LevySpec spec = make_levy_spec(1.0, 0.0);
    const auto bump = MassFunction::logistic_bump(1.0);
    const std::vector<double> times{1.0};
    std::vector<double> reference;
    for (std::size_t i = 0; i < 10000; ++i) {
      RngStream rng(StreamKey{64, StreamDomain::reference, i});
      reference.push_back(sample_path(spec, 1.0, 0.01, rng).values.back());
    }
    std::vector<double> stats;
    for (std::size_t n : {1, 100, 10000}) {
      std::vector<double> xs;
      for (std::size_t i = 0; i < 10000; ++i) {
        RngStream rng(StreamKey{64, StreamDomain::auxiliary, i});
        xs.push_back(rescaled_process_sample(spec, bump, n, 0.0, times, 0.01, rng)[0]);
      }
      const auto r = ks_two_sample(xs, reference);
      if (n == 1) CHECK(r.rejects());
      stats.push_back(r.statistic);
    }
    CHECK(stats[1] < stats[0]);
    CHECK(stats[2] < stats[0]);
  }

  TEST_CASE("direct and copies routes agree in law") {
    const LevySpec spec = make_levy_spec(1.0, 0.0);
    const auto bump = MassFunction::logistic_bump(1.0);
    const auto model = MaxIdModel::make(spec, bump, {0.0, 0.5, 1.0}, 0.02, -4.0);
    const auto b = bound_for(spec, bump, 1.0);
    const auto direct = zeta_n_replicates(model, b, 3, MdaRoute::direct, 65, 0, 0, 3000);
    const auto copies = zeta_n_replicates(model, b, 3, MdaRoute::copies, 65, 1, 0, 3000);
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<double> a, c;
      for (std::size_t r = 0; r < direct.size(); ++r) {
        a.push_back(direct[r].values[k]);
        c.push_back(copies[r].values[k]);
      }
      CHECK_FALSE(ks_two_sample(a, c).rejects());
    }
  }

  TEST_CASE("max-stability: zeta_n margins stay Gumbel") {
    const LevySpec spec = make_levy_spec(1.0, 0.0);
    const auto one = MassFunction::constant(1.0);
    const auto model = MaxIdModel::make(spec, one, {0.0, 1.0}, 0.02, -4.0);
    const auto b = bound_for(spec, one, 1.0);
    for (std::size_t n : {1, 10}) {
      const auto zs = zeta_n_replicates(model, b, n, MdaRoute::copies, 66, 0, 0, 1000);
      std::vector<double> col;
      for (const auto& z : zs) col.push_back(z.values[1]);
      CHECK_FALSE(ks_one_sample(col, testing::gumbel_cdf).rejects());
    }
  }

  TEST_CASE("serial and parallel ladders agree") {
    const LevySpec spec = make_levy_spec(1.0, 0.0);
    const auto bump = MassFunction::logistic_bump(1.0);
    const auto model = MaxIdModel::make(spec, bump, {0.0, 1.0}, 0.02, -3.0);
    const auto b = bound_for(spec, bump, 1.0);
    for (auto route : {MdaRoute::direct, MdaRoute::copies}) {
      const auto s = zeta_n_replicates(model, b, 10, route, 67, 0, 0, 30, Execution::serial());
      const auto p = zeta_n_replicates(model, b, 10, route, 67, 0, 0, 30, Execution::parallel(3));
      for (std::size_t r = 0; r < s.size(); ++r) CHECK(s[r].values == p[r].values);
    }
  }
}
