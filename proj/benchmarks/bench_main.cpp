#include <benchmark/benchmark.h>

#include <random>

#include "pipesizer/cmaes.hpp"
#include "pipesizer/cost.hpp"
#include "pipesizer/greedy.hpp"
#include "pipesizer/hydraulics.hpp"
#include "pipesizer/inp.hpp"
#include "pipesizer/objective.hpp"

using namespace pipesizer;

namespace {

const PipeNetwork& network_for(int which) {
  static const PipeNetwork nytp = bundled_network("nytp");
  static const PipeNetwork hanoi = bundled_network("hanoi");
  static const PipeNetwork nytp50 = bundled_network("nytp50");
  switch (which) {
    case 0: return nytp;
    case 1: return hanoi;
    default: return nytp50;
  }
}

// Random commercial designs, fixed seed so runs compare.
std::vector<DesignVector> sample_designs(const PipeNetwork& net, std::size_t count) {
  std::mt19937_64 rng(11);
  const auto sizes = net.diameter_table().sizes();
  std::uniform_int_distribution<std::size_t> pick(sizes.size() / 2, sizes.size() - 1);
  std::vector<DesignVector> out(count);
  for (auto& d : out) {
    d.flavor = DesignFlavor::kCommercial;
    for (std::size_t k = 0; k < net.decision_count(); ++k) d.diameters.push_back(sizes[pick(rng)]);
  }
  return out;
}

void BM_HydraulicSolve(benchmark::State& state) {
  const PipeNetwork& net = network_for(static_cast<int>(state.range(0)));
  const HydraulicSolver solver(net);
  const auto designs = sample_designs(net, 64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.solve(designs[i++ % designs.size()]));
  }
  state.SetLabel(net.name());
}
BENCHMARK(BM_HydraulicSolve)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_PenalisedCost(benchmark::State& state) {
  const PipeNetwork& net = network_for(static_cast<int>(state.range(0)));
  const NetworkProblem problem(net, PenaltyConfig::for_network(net));
  Objective objective = problem.objective();
  objective.set_threads(1);
  std::vector<std::vector<double>> xs;
  for (const auto& d : sample_designs(net, 64)) xs.push_back(problem.encode(d));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(objective.evaluate(xs[i++ % xs.size()]));
  }
  state.SetLabel(net.name());
}
BENCHMARK(BM_PenalisedCost)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_CmaGeneration(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> lower(n, -5.0), upper(n, 5.0);
  CmaOptions options;
  options.lambda = 40;
  options.stagnation_stop = false;
  CmaEs es(lower, upper, options, 3);
  std::vector<double> costs(options.lambda);
  for (auto _ : state) {
    auto xs = es.ask();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double s = 0.0;
      for (double v : xs[i]) s += v * v;
      costs[i] = s;
    }
    es.tell(xs, costs);
  }
}
BENCHMARK(BM_CmaGeneration)->Arg(21)->Arg(34)->Arg(210)->Unit(benchmark::kMicrosecond);

void BM_UpwardGreedyFromZero(benchmark::State& state) {
  const PipeNetwork& nytp = network_for(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(upward_greedy(nytp, min_design(nytp)));
  }
}
BENCHMARK(BM_UpwardGreedyFromZero)->Unit(benchmark::kMillisecond);

void BM_DownwardGreedyFromMax(benchmark::State& state) {
  const PipeNetwork& net = network_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(downward_greedy(net, max_design(net)));
  }
  state.SetLabel(net.name());
}
BENCHMARK(BM_DownwardGreedyFromMax)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
