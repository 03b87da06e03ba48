#include <benchmark/benchmark.h>

#include "osaq/combined.hpp"
#include "osaq/occupancy.hpp"
#include "osaq/sim.hpp"

namespace {

osaq::SystemParams make_params(int nodes, int channels) {
    osaq::RawParams raw;
    raw.n_nodes = nodes;
    raw.n_data_channels = channels;
    raw.p_c = 0.2;
    raw.eta = 0.9;
    raw.eta_c = 0.9;
    raw.lambda = 0.02;
    raw.q = 0.5;
    raw.p = 0.3;
    raw.qs_max = 5;
    return osaq::SystemParams::derive(raw);
}

void bm_occupancy_build(benchmark::State& state) {
    const auto params = make_params(static_cast<int>(state.range(0)),
                                    static_cast<int>(state.range(0)));
    const auto states = osaq::enumerate_states(params);
    for (auto _ : state) {
        benchmark::DoNotOptimize(osaq::build_occupancy_matrix(states, params));
    }
    state.counters["states"] = static_cast<double>(states.size());
}
BENCHMARK(bm_occupancy_build)->Arg(1)->Arg(2);

void bm_occupancy_solve(benchmark::State& state) {
    const auto params = make_params(2, 2);
    const auto states = osaq::enumerate_states(params);
    const auto P = osaq::build_occupancy_matrix(states, params);
    for (auto _ : state) {
        benchmark::DoNotOptimize(osaq::steady_state(P));
    }
}
BENCHMARK(bm_occupancy_solve);

void bm_combined_solve(benchmark::State& state) {
    const auto params = make_params(static_cast<int>(state.range(0)),
                                    static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(osaq::solve_combined(
            osaq::Protocol::Buffering, params, osaq::XrMethod::ExactRecursion));
    }
}
BENCHMARK(bm_combined_solve)->Arg(5)->Arg(10);

void bm_sim_slots(benchmark::State& state) {
    const auto params = make_params(10, 10);
    const long horizon = 50'000;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            osaq::run_replication(params, horizon, seed++, false));
    }
    state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(bm_sim_slots);

} // namespace

BENCHMARK_MAIN();
