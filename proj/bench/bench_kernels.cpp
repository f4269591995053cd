// Serial reference vs OpenMP kernels.
//
//   ./build/bench/cbsim_bench --benchmark_filter=Step
//
// Thread count is the benchmark argument; results are bit-identical across
// all variants (see test_behavior / test_engine), so only time differs.

#include "cbsim/behavior.hpp"
#include "cbsim/engine.hpp"
#include "cbsim/network.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

cbsim::ModelParams bench_params()
{
    cbsim::ModelParams p;
    p.alpha_p = 0.2;
    p.alpha_e = 0.3;
    p.alpha_b = 0.3;
    p.beta_p = 0.1;
    p.beta_e = 0.1;
    p.delta_b = 0.1;
    p.kappa_e = 0.3;
    p.kappa_b = 0.2;
    p.sigma = 0.02;
    p.init_p = p.init_e = p.init_b = 0.01;
    return p;
}

cbsim::ExternalSignal bench_signal(std::size_t days)
{
    std::vector<double> v(days);
    for (std::size_t k = 0; k < days; ++k) v[k] = 0.5 + 0.5 * std::sin(0.1 * static_cast<double>(k));
    return cbsim::ExternalSignal(cbsim::DailySeries(cbsim::iso_date("2020-01-31"), v));
}

void BM_StepSerial(benchmark::State& state)
{
    const auto net = cbsim::generate_network(cbsim::WattsStrogatz{10, 0.1}, static_cast<std::size_t>(state.range(0)), 1);
    const auto params = bench_params();
    std::vector<cbsim::AgentState> pop(net.size(), cbsim::initial_state(params));
    auto noise = cbsim::NoiseStream::for_population(1, net.size());
    for (auto _ : state) {
        pop = cbsim::step_population_serial(pop, net, 0.5, params, noise);
        benchmark::DoNotOptimize(pop.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StepSerial)->Arg(2000)->Arg(20000);

void BM_StepOpenMP(benchmark::State& state)
{
    const auto net = cbsim::generate_network(cbsim::WattsStrogatz{10, 0.1}, static_cast<std::size_t>(state.range(0)), 1);
    const auto params = bench_params();
    const auto threads = static_cast<int>(state.range(1));
    std::vector<cbsim::AgentState> pop(net.size(), cbsim::initial_state(params));
    auto noise = cbsim::NoiseStream::for_population(1, net.size());
    for (auto _ : state) {
        pop = cbsim::step_population(pop, net, 0.5, params, noise, threads);
        benchmark::DoNotOptimize(pop.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StepOpenMP)->Args({2000, 1})->Args({2000, 4})->Args({20000, 1})->Args({20000, 4});

void BM_EnsembleSerial(benchmark::State& state)
{
    const auto net = cbsim::generate_network(cbsim::WattsStrogatz{10, 0.1}, 2000, 1);
    const auto signal = bench_signal(149);
    const std::vector<cbsim::ModelParams> draws(static_cast<std::size_t>(state.range(0)), bench_params());
    for (auto _ : state) benchmark::DoNotOptimize(cbsim::run_ensemble_serial(draws, net, signal, 1));
}
BENCHMARK(BM_EnsembleSerial)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_EnsembleOpenMP(benchmark::State& state)
{
    const auto net = cbsim::generate_network(cbsim::WattsStrogatz{10, 0.1}, 2000, 1);
    const auto signal = bench_signal(149);
    const std::vector<cbsim::ModelParams> draws(static_cast<std::size_t>(state.range(0)), bench_params());
    const cbsim::EnsembleOptions options{static_cast<int>(state.range(1)), false};
    for (auto _ : state) benchmark::DoNotOptimize(cbsim::run_ensemble(draws, net, signal, 1, options));
}
BENCHMARK(BM_EnsembleOpenMP)->Args({8, 1})->Args({8, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
