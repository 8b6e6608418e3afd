// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "lbr/maxid.hpp"
#include "lbr/stats.hpp"

namespace {

using namespace lbr;

struct Fixture {
  MaxIdModel model;
  ExceedanceBound bound;

  Fixture() {
    const LevySpec spec = make_levy_spec(1.0, 0.0);
    const MassFunction alpha = MassFunction::logistic_bump(1.0);
    model = MaxIdModel::make(spec, alpha, {0.0, 0.5, 1.0, 2.0}, 0.01, -5.0);
    RngStream rng(StreamKey{1, StreamDomain::exceedance});
    bound = default_exceedance_bound(spec, alpha, 2.0, rng);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_ReplicatesReference(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_replicates_reference(f.model, f.bound, 7, 0, 0, state.range(0)));
}

void BM_ReplicatesSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_replicates(f.model, f.bound, 7, 0, 0, state.range(0), Execution::serial()));
}

void BM_ReplicatesParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_replicates(f.model, f.bound, 7, 0, 0, state.range(0), Execution::parallel()));
}

PointCloud gaussian_cloud(std::size_t n, std::uint64_t tag) {
  RngStream rng(StreamKey{3, StreamDomain::auxiliary, tag});
  PointCloud c(4);
  for (std::size_t i = 0; i < n * 4; ++i) c.data.push_back(rng.normal());
  return c;
}

void BM_EnergyReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PointCloud a = gaussian_cloud(n, 1);
  const PointCloud b = gaussian_cloud(n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(energy_permutation_test_reference(a, b, 500, StreamKey{9, StreamDomain::permutation}));
}

void BM_EnergySerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PointCloud a = gaussian_cloud(n, 1);
  const PointCloud b = gaussian_cloud(n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        energy_permutation_test(a, b, 500, StreamKey{9, StreamDomain::permutation}, Execution::serial()));
}

void BM_EnergyParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PointCloud a = gaussian_cloud(n, 1);
  const PointCloud b = gaussian_cloud(n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        energy_permutation_test(a, b, 500, StreamKey{9, StreamDomain::permutation}, Execution::parallel()));
}

}  // namespace

BENCHMARK(BM_ReplicatesReference)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicatesSerial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicatesParallel)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergyReference)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergySerial)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnergyParallel)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
