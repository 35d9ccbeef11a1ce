// Serial reference vs OpenMP kernels for dataset generation and evaluation.

#include <benchmark/benchmark.h>

#include "rema/agents.hpp"
#include "rema/data.hpp"
#include "rema/exp.hpp"

namespace {

using namespace rema;

const Dataset& validation_set() {
    static const Dataset ds = [] {
        ScenarioConfig cfg;
        cfg.seed = 43;
        return generate_dataset(cfg, 10000, Role::validation);
    }();
    return ds;
}

const QTable& trained_table() {
    static const QTable table = [] {
        ScenarioConfig cfg;
        cfg.seed = 42;
        const Dataset train_ds = generate_dataset(cfg, 2000, Role::train);
        QTable t = init_qtable(cfg, Variant::base, 1);
        Rng rng(1);
        train(t, train_ds, RewardParams{}, rng, 1);
        return t;
    }();
    return table;
}

template <auto Generate>
void BM_generate(benchmark::State& state) {
    ScenarioConfig cfg;
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(Generate(cfg, n, Role::train));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Evaluate>
void BM_evaluate_heuristic(benchmark::State& state) {
    const auto& ds = validation_set();
    for (auto _ : state) benchmark::DoNotOptimize(Evaluate(Agent::heuristic(), ds, RewardParams{}, 7));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(ds.episodes.size()));
}

template <auto Evaluate>
void BM_evaluate_q(benchmark::State& state) {
    const auto& ds = validation_set();
    const auto agent = Agent::learned(AgentKind::q, trained_table());
    for (auto _ : state) benchmark::DoNotOptimize(Evaluate(agent, ds, RewardParams{}, 7));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(ds.episodes.size()));
}

}  // namespace

BENCHMARK(BM_generate<generate_dataset_serial>)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_generate<generate_dataset>)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_evaluate_heuristic<evaluate_serial>)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_evaluate_heuristic<evaluate>)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_evaluate_q<evaluate_serial>)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_evaluate_q<evaluate>)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
