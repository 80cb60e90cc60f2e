// Serial reference vs OpenMP path kernels.
#include <benchmark/benchmark.h>

#include "rareis/experiment.hpp"

using namespace rareis;

namespace {

void terminal(benchmark::State& state, Execution execution) {
  const TerminalStudy study = make_terminal_study(one_well_rough());
  SimulationConfig c;
  c.epsilon = 0.25;
  c.delta = 0.1;
  c.dt = 1e-3;
  c.n_paths = static_cast<std::size_t>(state.range(0));
  c.seed = 1;
  for (auto _ : state) {
    const auto o = run_terminal_cell(study, "optimal", c, execution);
    benchmark::DoNotOptimize(o.estimate);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void exit_cell(benchmark::State& state, Execution execution) {
  const ExitStudy study = make_exit_study("quadratic");
  SimulationConfig c;
  c.epsilon = 0.1;
  c.T = 2.5;
  c.dt = 1e-3;
  c.n_paths = static_cast<std::size_t>(state.range(0));
  c.seed = 1;
  for (auto _ : state) {
    const auto o = run_exit_cell(study, "combined", c, execution);
    benchmark::DoNotOptimize(o.estimate);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(terminal, serial, Execution::serial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(terminal, parallel, Execution::parallel)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(exit_cell, serial, Execution::serial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(exit_cell, parallel, Execution::parallel)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
