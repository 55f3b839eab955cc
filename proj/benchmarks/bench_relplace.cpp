#include <benchmark/benchmark.h>

#include <random>

#include "relplace/mdp.hpp"
#include "relplace/trellis.hpp"

namespace {

using namespace relplace;

Infrastructure full_scale_infrastructure(Units capacity = 80) {
  std::vector<InpSpec> inps;
  for (int i = 0; i < 7; ++i) inps.push_back({0.07 - 0.01 * i, {{capacity}, {capacity}, {capacity}}});
  const std::size_t n = 21;
  Matrix<double> cost(n, std::vector<double>(n, 0.2));
  Matrix<Units> bw(n, std::vector<Units>(n, 1000));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b)
      if (a / 3 == b / 3) cost[a][b] = 0.05;
    cost[a][a] = 0.0;
    bw[a][a] = 0;
  }
  return Infrastructure(inps, {1.0}, 15.0, 0.07, cost, bw, Matrix<double>(7, std::vector<double>(6, 5.0)));
}

ServiceCatalog full_scale_catalog() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<Units> demand(20, 30);
  std::uniform_int_distribution<int> vtype(0, 5);
  ServiceCatalog c;
  const double caps[] = {0.04, 0.03, 0.02, 0.01};
  for (int l = 0; l < 4; ++l) {
    ServiceType t;
    t.name = "s" + std::to_string(l);
    t.failure_cap = caps[l];
    t.departure_prob = 0.5;
    t.bandwidth = 10.0;
    t.admission_reward = 4000.0;
    t.sigma_max = 5;
    t.arrival_pmf = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    for (int u = 0; u < 3 + l; ++u) t.vnfs.push_back({vtype(rng), {demand(rng)}});
    c.push_back(t);
  }
  return c;
}

/// Ample capacity so every stage runs; N is the number of trellis stages.
void BM_VrsspFullScale(benchmark::State& state) {
  const auto infra = full_scale_infrastructure(1000);
  const auto catalog = full_scale_catalog();
  const int services = static_cast<int>(state.range(0));
  VrsspInput input;
  input.action.assign(4, 0);
  for (int k = 0; k < services; ++k) {
    input.arrangement.push_back(k % 4);
    ++input.action[k % 4];
  }
  input.snapshot = infra.capacities();
  for (auto _ : state) benchmark::DoNotOptimize(run_vrssp(input, catalog, infra));
  state.SetComplexityN(stage_count(input, catalog));
}
BENCHMARK(BM_VrsspFullScale)->DenseRange(1, 8)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

void BM_TransitionModelBuild(benchmark::State& state) {
  const auto catalog = full_scale_catalog();
  const StateSpace space = StateSpace::from_catalog(catalog);
  for (auto _ : state) benchmark::DoNotOptimize(TransitionModel(space, catalog));
}
BENCHMARK(BM_TransitionModelBuild)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
