#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "lbr/parallel.hpp"
#include "lbr/rng.hpp"

namespace lbr {

enum class TestMethod { ks1, ks2, energy_perm, poisson_dispersion, bound_check };

std::string_view method_name(TestMethod method);

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  TestMethod method = TestMethod::ks1;
  double threshold = 0.01;

  bool rejects() const { return p_value < threshold; }
};

/// P[K > x] for the Kolmogorov distribution K = sup |Brownian bridge|.
double kolmogorov_sf(double x);

/// sup_x |F_n(x) - F(x)| with an asymptotic p-value. The cdf is probed at
/// the sample points and must be monotone with values in [0, 1].
TestReport ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf,
                         double threshold = 0.01);

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double threshold = 0.01);

/// Row-major set of points in R^dim.
struct PointCloud {
  std::size_t dim = 0;
  std::vector<double> data;

  PointCloud() = default;
  explicit PointCloud(std::size_t d) : dim(d) {}
  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  const double* row(std::size_t i) const { return data.data() + i * dim; }
  void push_back(std::span<const double> point);
};

/// V-statistic 2 E|A-B| - E|A-A'| - E|B-B'| with Euclidean norms.
double energy_statistic(const PointCloud& a, const PointCloud& b);

/// Energy distance with a permutation p-value (1 + #{perm >= obs}) / (1 + P).
/// Permutation j draws from the substream {key.seed, permutation, key.a, key.b, j}.
/// Pairwise distances are tabulated once; the permutation loop runs under `exec`.
TestReport energy_permutation_test(const PointCloud& a, const PointCloud& b, std::size_t permutations,
                                   const StreamKey& key, const Execution& exec = Execution::parallel(),
                                   double threshold = 0.01);

/// Direct serial evaluation of every permuted statistic from the points.
TestReport energy_permutation_test_reference(const PointCloud& a, const PointCloud& b, std::size_t permutations,
                                             const StreamKey& key, double threshold = 0.01);

/// Index of dispersion (n-1) s^2 / mean against chi-square(n-1), two-sided.
TestReport poisson_dispersion_test(std::span<const std::uint64_t> counts, double threshold = 0.01);

/// max |f(t) - f(s)| over grid pairs with |t - s| < delta.
double modulus_of_continuity(std::span<const double> values, std::span<const double> times, double delta);

/// Holm step-down adjusted p-values, in input order.
std::vector<double> holm_adjust(std::span<const double> p_values);

}  // namespace lbr
