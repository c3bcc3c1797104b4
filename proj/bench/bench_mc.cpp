// Serial vs OpenMP Monte Carlo kernels. Same seed, same per-path streams, so
// the two variants do identical work; only the scheduling differs.
#include <benchmark/benchmark.h>

#include <vector>

#include "merton/mc_kernels.hpp"

namespace {

using namespace merton;

const MarketParams market{0.4027, 0.5905, 0.0501, 0.024};

mc::StepGrid grid_for(std::int64_t steps) {
    const double T = 1.0;
    return mc::make_step_grid(PolicyPath::constant(0.74, T), T / static_cast<double>(steps));
}

template <void (*Kernel)(const MarketParams&, const mc::StepGrid&, std::uint64_t, std::span<double>)>
void run(benchmark::State& state) {
    const auto grid = grid_for(state.range(1));
    std::vector<double> out(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        Kernel(market, grid, 7, out);
        benchmark::DoNotOptimize(out.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
    state.counters["threads"] = mc::omp::max_threads();
}

void sizes(benchmark::internal::Benchmark* b) {
    b->ArgNames({"paths", "steps"});
    b->Args({10000, 252});
    b->Args({100000, 252});
    b->Args({100000, 12});
    b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(run<mc::serial::terminal_wealth>)->Name("terminal_wealth/serial")->Apply(sizes);
BENCHMARK(run<mc::omp::terminal_wealth>)->Name("terminal_wealth/omp")->Apply(sizes);
BENCHMARK(run<mc::serial::reduced_objective>)->Name("reduced_objective/serial")->Apply(sizes);
BENCHMARK(run<mc::omp::reduced_objective>)->Name("reduced_objective/omp")->Apply(sizes);

BENCHMARK_MAIN();
