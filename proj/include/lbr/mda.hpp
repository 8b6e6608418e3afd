#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lbr/maxid.hpp"

namespace lbr {

/// zeta_n(t) = max_{k <= n} Z_t^(k) - log n on a shared grid.
struct RescaledSample {
  std::size_t n = 1;
  std::vector<double> eval_times;
  std::vector<double> values;
  double error_cert = 1.0;
};

/// Pointwise maximum of n i.i.d. copies minus log n. The certificate is
/// 1 - (1 - max copy certificate)^n. Throws GridMismatch.
RescaledSample zeta_n(std::span<const MaxIdSample> copies);

/// eta_n(x) = n eta(x + log n) = alpha(x + log n) exp(-x).
double rescaled_intensity(const MassFunction& alpha, std::size_t n, double x);

/// int_z^inf eta_n(x) dx - exp(-z), by adaptive quadrature of
/// (alpha(x + log n) - 1) exp(-x) so the difference is not lost to cancellation.
double rescaled_tail_gap(const MassFunction& alpha, std::size_t n, double z);

/// One path of X^n_t(x) = X_t(x + log n) - log n on eval_times.
std::vector<double> rescaled_process_sample(const LevySpec& spec, const MassFunction& alpha, std::size_t n,
                                            double x, std::span<const double> eval_times, double base_step,
                                            RngStream& rng);

/// The model whose Z has the law of zeta_n. A PPP with intensity eta_n
/// carrying the particles X^n is exactly the superposition of n copies
/// shifted by -log n, and X^n runs on the clock alpha(. + log n).
MaxIdModel rescaled_model(const MaxIdModel& model, std::size_t n);

/// The reference model for zeta_L: same Levy spec and grid, alpha = 1.
MaxIdModel reference_model(const MaxIdModel& model);

/// How zeta_n replicates are produced.
enum class MdaRoute {
  direct,  ///< one replicate of rescaled_model(model, n)
  copies,  ///< n copies of model with floor + log n each, then zeta_n
};

/// Replicates first..first+count-1 of zeta_n. Streams are keyed by
/// (seed, family, replicate[, copy]) and do not depend on n, so different n
/// share common random numbers. Empty copies contribute -inf.
std::vector<RescaledSample> zeta_n_replicates(const MaxIdModel& model, const ExceedanceBound& bound, std::size_t n,
                                              MdaRoute route, std::uint64_t seed, std::uint64_t family,
                                              std::uint64_t first, std::size_t count,
                                              const Execution& exec = Execution::parallel());

}  // namespace lbr
