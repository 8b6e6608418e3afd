#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "lbr/clock.hpp"
#include "lbr/levy.hpp"
#include "lbr/parallel.hpp"
#include "lbr/ppp.hpp"

namespace lbr {

/// Everything needed to simulate Z_t = max_i X_t^(i)(U^(i)) on an
/// evaluation grid: the Levy model, the mass function (which fixes both the
/// PPP intensity alpha(x)exp(-x)dx and the time change), the grid, and the
/// PPP truncation floor.
struct MaxIdModel {
  LevySpec spec;
  MassFunction alpha = MassFunction::constant(1.0);
  std::shared_ptr<const IntensityMeasure> measure;
  std::vector<double> eval_times;
  double base_step = 0.01;
  double floor = -6.0;
  std::size_t max_points = default_max_points;

  static MaxIdModel make(const LevySpec& spec, const MassFunction& alpha, std::vector<double> eval_times,
                         double base_step, double floor, std::size_t max_points = default_max_points);

  double eval_horizon() const { return eval_times.back(); }
  /// Levy time each particle needs: the clock never runs slower than lower().
  double levy_horizon() const;
  MaxIdModel with_floor(double floor) const;
};

/// Coordinates of one replicate of Z. Streams for its points and for each
/// particle are derived from these, so replicates are reproducible alone.
struct ReplicateId {
  std::uint64_t seed = 0;
  std::uint64_t family = 0;  ///< separates independent sample sets
  std::uint64_t replicate = 0;
  std::uint64_t copy = 0;  ///< i.i.d. copy index inside a rescaled maximum

  StreamKey points_key() const;
  StreamKey particle_key(std::size_t particle) const;
};

/// A realized particle system: PPP starts above the floor and the
/// trajectory X^(i)(U^(i)) of every particle on the evaluation grid.
struct ParticleSystem {
  PointSet starts;
  std::vector<double> eval_times;
  std::vector<std::vector<double>> paths;
  LevySpec spec;
  MassFunction alpha = MassFunction::constant(1.0);
  double base_step = 0.0;

  std::size_t size() const { return paths.size(); }
};

/// X_t(x) on the model's grid, drawing the Levy path from rng.
std::vector<double> particle_trajectory(const MaxIdModel& model, double x, RngStream& rng);

ParticleSystem build_particle_system(const MaxIdModel& model, const ReplicateId& id);

/// Constants of the exceedance bound
///   P[sup_{s<=t} X_s(x) >= u] <= C * P[L_T >= u - x - v],   u - x > v,
/// with C = 1 / P[inf_{[0,T]} L >= -v]. T = levy_horizon covers the whole
/// Levy time a particle can use before clock time t.
struct ExceedanceBound {
  double v = 1.0;
  double c_vt = 1.0;
  double horizon = 0.0;
  double levy_horizon = 0.0;
  double alpha_hi = 1.0;
  double inf_prob = 1.0;        ///< point estimate (exact for Brownian specs)
  double inf_prob_lower = 1.0;  ///< lower 99% confidence bound used for c_vt
  bool exact = true;
  LevySpec spec;
  std::shared_ptr<const IncrementLaw> law;  ///< law of L at levy_horizon
};

/// Levy time used by the exceedance bound for clock horizon t.
double exceedance_levy_horizon(const MassFunction& alpha, double horizon);

ExceedanceBound exceedance_bound(const LevySpec& spec, const MassFunction& alpha, double horizon, double v,
                                 RngStream& rng, std::size_t paths = 100'000, double base_step = 0.01);

/// Smallest v in {1, 2, 4, 8} whose infimum probability is at least 0.2.
ExceedanceBound default_exceedance_bound(const LevySpec& spec, const MassFunction& alpha, double horizon,
                                         RngStream& rng, std::size_t paths = 100'000, double base_step = 0.01);

/// C * P[L_T >= u - x - v]; requires u - x > v.
double lemma_bound(const ExceedanceBound& b, double u, double x);

/// Rate bound alpha_hi * (C exp(v-u) + exp(-(u-v))) on the mean number of
/// particles whose supremum over the horizon reaches u.
double lambda_u_bound(const ExceedanceBound& b, double u);

/// Probability bound that some particle started below `floor` reaches u
/// over the horizon: 1 - exp(-rate), where
///   rate = alpha_hi * C * exp(v-u) * E[(exp(L_T) - exp(u-v-floor))^+]
/// is the lemma-based rate integrated over starts x < floor. Returns 1 when
/// u - floor <= v (outside the lemma's range).
double omitted_mass_bound(const ExceedanceBound& b, double floor, double u);

/// Z on the evaluation grid for one replicate.
struct MaxIdSample {
  std::vector<double> eval_times;
  std::vector<double> z_values;
  double floor = 0.0;
  double error_cert = 1.0;
  std::size_t particles = 0;

  double min_value() const;
};

/// Pointwise maximum over all particles. Throws EmptySystem if there are none.
MaxIdSample truncated_max(const ParticleSystem& system, const ExceedanceBound& bound);

/// Number of particles whose maximum over the grid reaches u. Throws
/// TruncationBias unless omitted_mass_bound(floor, u) < 1e-3.
std::size_t sup_exceedance_count(const ParticleSystem& system, double u, const ExceedanceBound& bound);

/// Same result as truncated_max(build_particle_system(model, id)) but
/// skips the clock for particles that cannot reach the running maximum.
MaxIdSample simulate_max_id(const MaxIdModel& model, const ExceedanceBound& bound, const ReplicateId& id);

/// As simulate_max_id, but an empty system yields nullopt instead of throwing.
std::optional<MaxIdSample> try_simulate_max_id(const MaxIdModel& model, const ExceedanceBound& bound,
                                               const ReplicateId& id);

/// sup_exceedance_count(build_particle_system(model, id), u, bound) without
/// materializing the system.
std::size_t count_sup_exceedances(const MaxIdModel& model, const ExceedanceBound& bound, const ReplicateId& id,
                                  double u);

/// Replicates first..first+count-1 of family `family`. The OpenMP path and
/// the serial path give identical output.
std::vector<MaxIdSample> simulate_replicates(const MaxIdModel& model, const ExceedanceBound& bound,
                                             std::uint64_t seed, std::uint64_t family, std::uint64_t first,
                                             std::size_t count, const Execution& exec = Execution::parallel());

/// Unscreened reference: build the full particle system, then take the max.
std::vector<MaxIdSample> simulate_replicates_reference(const MaxIdModel& model, const ExceedanceBound& bound,
                                                       std::uint64_t seed, std::uint64_t family,
                                                       std::uint64_t first, std::size_t count);

struct FloorChoice {
  double floor = 0.0;
  double u_ref = 0.0;        ///< 0.1% quantile of min Z in the pilot run
  double certificate = 1.0;  ///< omitted_mass_bound(floor, u_ref)
  double expected_points = 0.0;
};

/// Largest floor (on a 0.25 grid) whose omitted-mass bound at the pilot
/// estimate of u_ref is below `target`.
FloorChoice choose_floor(const MaxIdModel& model, const ExceedanceBound& bound, std::uint64_t seed,
                         double target = 1e-3, std::size_t pilot_replicates = 1000,
                         const Execution& exec = Execution::parallel());

}  // namespace lbr
