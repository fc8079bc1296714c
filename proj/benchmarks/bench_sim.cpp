// SPDX-License-Identifier: Apache-2.0
#include "hnl/sim.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>

using namespace hnl;

namespace {

void BM_SimulatedDay(benchmark::State& state) {
    sim::SimConfig cfg;
    cfg.seed = 3;
    cfg.duration_s = 86'400.0;
    cfg.n_peers = static_cast<std::size_t>(state.range(0));
    cfg.n_honeypots = 24;
    cfg.catalog_size = 50;
    auto catalog = sim::make_catalog(cfg);
    auto dplan = sim::make_scenario_plan(cfg, catalog);
    auto dir = std::filesystem::temp_directory_path() / "hnl-bench-sim";

    std::uint64_t events = 0;
    for (auto _ : state) {
        auto result = sim::run_simulation(cfg, dplan, dir.string());
        events += result.events;
        benchmark::DoNotOptimize(result);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(events));
    state.counters["events"] = static_cast<double>(events) / static_cast<double>(state.iterations());
}
BENCHMARK(BM_SimulatedDay)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
