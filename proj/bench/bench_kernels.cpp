#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "nicons/analysis.hpp"
#include "nicons/graph.hpp"
#include "nicons/linsys.hpp"
#include "nicons/network.hpp"
#include "nicons/plant.hpp"
#include "nicons/sim.hpp"

namespace {

using namespace nicons;

Graph four_node_graph() { return Graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}}); }

ClosedLoop four_pendulums() {
  return network_interconnect(pendulum_plant({}), build_controller_network(first_order(10.0, 10.0), four_node_graph()));
}

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel; }

void BM_PositivityScan(benchmark::State& state) {
  const ClosedLoop cl = four_pendulums();
  const CompositeStorage w = composite_storage(cl, pendulum_storage({}), controller_storage(10.0, 10.0));
  Vec plant(2), ctrl(1);
  plant << 3.14159, 5.0;
  ctrl << 5.0;
  const Box box = per_node_box(cl.layout(), plant, ctrl);
  for (auto _ : state) benchmark::DoNotOptimize(storage_positivity_scan(w, box, 20000, mode(state)));
}

void BM_GammaGrid(benchmark::State& state) {
  const ControllerNetwork net = build_controller_network(first_order(10.0, 10.0), four_node_graph());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-25.0, 25.0);
  std::vector<Vec> inputs(2000, Vec(4));
  for (Vec& v : inputs)
    for (Eigen::Index k = 0; k < 4; ++k) v(k) = u(rng);
  const NonlinearPlant p = pendulum_plant({});
  for (auto _ : state) benchmark::DoNotOptimize(gamma_estimate(p, net, inputs, mode(state)));
}

void BM_FrequencySweep(benchmark::State& state) {
  const StateSpace m = laplacian_realization(laplacian(four_node_graph()), first_order(10.0, 10.0));
  const FreqGrid grid = FreqGrid::log_spaced(1e-3, 1e4, 4000);
  for (auto _ : state) benchmark::DoNotOptimize(osni_freq_sweep(m, 0.02, grid, mode(state)));
}

void BM_TrajectoryChecks(benchmark::State& state) {
  const ClosedLoop cl = four_pendulums();
  std::vector<Vec> plants;
  for (double a : {2.0, 1.0, -1.0, -2.0}) plants.push_back((Vec(2) << a, 0.0).finished());
  const Trajectory t = integrate(cl, cl.compose_state(plants), IntegratorConfig{});
  const CompositeStorage w = composite_storage(cl, pendulum_storage({}), controller_storage(10.0, 10.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_lyapunov_monotone(t, w, 0.05, four_node_graph(), 1e-6, mode(state)));
    benchmark::DoNotOptimize(check_osni_like_network(t, controller_storage(10.0, 10.0), four_node_graph(), 0.05,
                                                     1e-6, mode(state)));
  }
}

// Argument 0 is the serial reference, 1 the OpenMP kernel.
BENCHMARK(BM_PositivityScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GammaGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FrequencySweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrajectoryChecks)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
