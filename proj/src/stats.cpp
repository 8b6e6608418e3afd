#include "lbr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "lbr/errors.hpp"

namespace lbr {

std::string_view method_name(TestMethod method) {
  switch (method) {
    case TestMethod::ks1: return "ks1";
    case TestMethod::ks2: return "ks2";
    case TestMethod::energy_perm: return "energy_perm";
    case TestMethod::poisson_dispersion: return "poisson_dispersion";
    case TestMethod::bound_check: return "bound_check";
  }
  return "unknown";
}

double kolmogorov_sf(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.18) {
    // Jacobi-theta form of the distribution function, fast for small x.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * c);
      cdf += term;
      if (term < 1e-17 * cdf) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sf += (k % 2 == 1 ? term : -term);
    if (term < 1e-300 || term < 1e-17 * sf) break;
  }
  return std::clamp(2.0 * sf, 0.0, 1.0);
}

TestReport ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf,
                         double threshold) {
  if (sample.size() < 100) throw InvalidArgument("ks_one_sample needs at least 100 values");
  std::vector<double> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  double previous = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) throw InvalidArgument("ks_one_sample: non-finite value");
    const double f = cdf(xs[i]);
    if (!(f >= 0.0 && f <= 1.0) || f < previous)
      throw NonMonotoneCdf("cdf is not a monotone map into [0, 1] near x = " + std::to_string(xs[i]));
    previous = f;
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  TestReport r;
  r.statistic = d;
  r.p_value = kolmogorov_sf(std::sqrt(n) * d);
  r.n_a = xs.size();
  r.method = TestMethod::ks1;
  r.threshold = threshold;
  return r;
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double threshold) {
  if (a.size() < 100 || b.size() < 100) throw InvalidArgument("ks_two_sample needs at least 100 values per sample");
  std::vector<double> xa(a.begin(), a.end());
  std::vector<double> xb(b.begin(), b.end());
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double x = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] == x) ++i;
    while (j < xb.size() && xb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  TestReport r;
  r.statistic = d;
  r.p_value = kolmogorov_sf(std::sqrt(na * nb / (na + nb)) * d);
  r.n_a = xa.size();
  r.n_b = xb.size();
  r.method = TestMethod::ks2;
  r.threshold = threshold;
  return r;
}

// ---------------------------------------------------------------------------

void PointCloud::push_back(std::span<const double> point) {
  if (point.size() != dim) throw DimensionMismatch("point has the wrong dimension");
  data.insert(data.end(), point.begin(), point.end());
}

namespace {

double distance(const double* x, const double* y, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return std::sqrt(s);
}

void check_energy_inputs(const PointCloud& a, const PointCloud& b, std::size_t permutations) {
  if (a.dim != b.dim || a.dim == 0) throw DimensionMismatch("energy test: samples differ in dimension");
  if (a.size() < 200 || b.size() < 200) throw InvalidArgument("energy test needs at least 200 points per sample");
  if (permutations < 500) throw InvalidArgument("energy test needs at least 500 permutations");
}

/// Labels of permutation j: the first n_a entries of a uniform shuffle are group A.
std::vector<std::uint32_t> permuted_order(std::size_t total, const StreamKey& key, std::size_t j) {
  RngStream rng(StreamKey{key.seed, StreamDomain::permutation, key.a, key.b, key.c, j});
  std::vector<std::uint32_t> order(total);
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = total - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  return order;
}

double energy_from_sums(double s_aa, double s_bb, double s_ab, double na, double nb) {
  return 2.0 * s_ab / (na * nb) - 2.0 * s_aa / (na * na) - 2.0 * s_bb / (nb * nb);
}

TestReport finish_report(double observed, std::size_t at_least, std::size_t permutations, const PointCloud& a,
                         const PointCloud& b, double threshold) {
  TestReport r;
  r.statistic = observed;
  r.p_value = (1.0 + static_cast<double>(at_least)) / (1.0 + static_cast<double>(permutations));
  r.n_a = a.size();
  r.n_b = b.size();
  r.method = TestMethod::energy_perm;
  r.threshold = threshold;
  return r;
}

}  // namespace

double energy_statistic(const PointCloud& a, const PointCloud& b) {
  if (a.dim != b.dim) throw DimensionMismatch("energy statistic: samples differ in dimension");
  auto within = [](const PointCloud& c) {
    double s = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) s += distance(c.row(i), c.row(j), c.dim);
    return s;
  };
  double across = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) across += distance(a.row(i), b.row(j), a.dim);
  return energy_from_sums(within(a), within(b), across, static_cast<double>(a.size()),
                          static_cast<double>(b.size()));
}

TestReport energy_permutation_test(const PointCloud& a, const PointCloud& b, std::size_t permutations,
                                   const StreamKey& key, const Execution& exec, double threshold) {
  check_energy_inputs(a, b, permutations);
  const std::size_t na = a.size();
  const std::size_t total = na + b.size();
  const std::size_t dim = a.dim;
  auto point = [&](std::size_t i) { return i < na ? a.row(i) : b.row(i - na); };

  // Packed strict lower triangle of the pooled distance matrix, row i at i(i-1)/2.
  std::vector<float> dist(total * (total - 1) / 2);
  std::vector<double> row_sum(total, 0.0);
  for_each_index(total, exec, [&](std::size_t i) {
    float* out = dist.data() + i * (i - 1) / 2;
    for (std::size_t j = 0; j < i; ++j) out[j] = static_cast<float>(distance(point(i), point(j), dim));
  });
  double grand = 0.0;
  for (std::size_t i = 1; i < total; ++i) {
    const float* row = dist.data() + i * (i - 1) / 2;
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::size_t j = 0; j < i; ++j) s += row[j];
    row_sum[i] += s;
    grand += s;
    for (std::size_t j = 0; j < i; ++j) row_sum[j] += row[j];
  }

  const double dna = static_cast<double>(na);
  const double dnb = static_cast<double>(b.size());
  // Only the within-A sum needs a pass over the matrix; the other two follow
  // from the row sums and the grand total.
  auto statistic_for = [&](const std::vector<float>& mask) {
    double s_aa = 0.0;
    double touched = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      if (mask[i] == 0.0f) continue;
      touched += row_sum[i];
      const float* row = dist.data() + i * (i - 1) / 2;
      const float* m = mask.data();
      double s = 0.0;
#pragma omp simd reduction(+ : s)
      for (std::size_t j = 0; j < i; ++j) s += static_cast<double>(m[j] * row[j]);
      s_aa += s;
    }
    const double s_bb = grand - touched + s_aa;
    const double s_ab = grand - s_aa - s_bb;
    return energy_from_sums(s_aa, s_bb, s_ab, dna, dnb);
  };

  std::vector<float> observed_mask(total, 0.0f);
  std::fill(observed_mask.begin(), observed_mask.begin() + static_cast<std::ptrdiff_t>(na), 1.0f);
  const double observed = statistic_for(observed_mask);

  std::vector<std::uint8_t> exceeds(permutations, 0);
  for_each_index(permutations, exec, [&](std::size_t j) {
    const auto order = permuted_order(total, key, j);
    std::vector<float> mask(total, 0.0f);
    for (std::size_t i = 0; i < na; ++i) mask[order[i]] = 1.0f;
    exceeds[j] = statistic_for(mask) >= observed ? 1 : 0;
  });
  const auto at_least = static_cast<std::size_t>(std::count(exceeds.begin(), exceeds.end(), 1));
  return finish_report(observed, at_least, permutations, a, b, threshold);
}

TestReport energy_permutation_test_reference(const PointCloud& a, const PointCloud& b, std::size_t permutations,
                                             const StreamKey& key, double threshold) {
  check_energy_inputs(a, b, permutations);
  const std::size_t na = a.size();
  const std::size_t total = na + b.size();
  PointCloud pooled(a.dim);
  pooled.data = a.data;
  pooled.data.insert(pooled.data.end(), b.data.begin(), b.data.end());

  const double observed = energy_statistic(a, b);
  std::size_t at_least = 0;
  for (std::size_t j = 0; j < permutations; ++j) {
    const auto order = permuted_order(total, key, j);
    std::vector<std::uint8_t> in_a(total, 0);
    for (std::size_t i = 0; i < na; ++i) in_a[order[i]] = 1;
    PointCloud pa(a.dim);
    PointCloud pb(a.dim);
    for (std::size_t i = 0; i < total; ++i)
      (in_a[i] ? pa : pb).push_back(std::span<const double>(pooled.row(i), a.dim));
    if (energy_statistic(pa, pb) >= observed) ++at_least;
  }
  return finish_report(observed, at_least, permutations, a, b, threshold);
}

// ---------------------------------------------------------------------------

TestReport poisson_dispersion_test(std::span<const std::uint64_t> counts, double threshold) {
  if (counts.size() < 1000) throw InvalidArgument("poisson_dispersion_test needs at least 1000 counts");
  const double n = static_cast<double>(counts.size());
  double mean = 0.0;
  for (auto c : counts) mean += static_cast<double>(c);
  mean /= n;
  if (mean == 0.0) throw AllZero("all counts are zero; the dispersion index is undefined");
  double ss = 0.0;
  for (auto c : counts) ss += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
  const double index = ss / mean;
  const boost::math::chi_squared chi(n - 1.0);
  const double lower = boost::math::cdf(chi, index);
  const double upper = boost::math::cdf(boost::math::complement(chi, index));
  TestReport r;
  r.statistic = index;
  r.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
  r.n_a = counts.size();
  r.method = TestMethod::poisson_dispersion;
  r.threshold = threshold;
  return r;
}

double modulus_of_continuity(std::span<const double> values, std::span<const double> times, double delta) {
  if (values.size() != times.size()) throw InvalidArgument("modulus_of_continuity: size mismatch");
  if (!(delta > 0.0)) throw InvalidArgument("modulus_of_continuity: delta must be > 0");
  // Sliding window [i, end) of grid points within delta of times[i], with
  // monotone deques for its max and min.
  std::deque<std::size_t> hi;
  std::deque<std::size_t> lo;
  std::size_t end = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    while (end < times.size() && times[end] - times[i] < delta) {
      while (!hi.empty() && values[hi.back()] <= values[end]) hi.pop_back();
      while (!lo.empty() && values[lo.back()] >= values[end]) lo.pop_back();
      hi.push_back(end);
      lo.push_back(end);
      ++end;
    }
    while (hi.front() < i) hi.pop_front();
    while (lo.front() < i) lo.pop_front();
    best = std::max(best, values[hi.front()] - values[lo.front()]);
  }
  return best;
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return p_values[x] < p_values[y]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double scaled = std::min(1.0, static_cast<double>(m - k) * p_values[order[k]]);
    running = std::max(running, scaled);
    adjusted[order[k]] = running;
  }
  return adjusted;
}

}  // namespace lbr
