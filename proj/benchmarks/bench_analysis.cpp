// SPDX-License-Identifier: Apache-2.0
#include "hnl/analysis.hpp"

#include "hnl/anonymize.hpp"
#include "hnl/manager.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

using namespace hnl;

namespace {

analysis::UnifiedLog make_log(std::size_t records) {
    auto salt = anonymize::salt_from_seed(4);
    std::mt19937_64 rng(5);
    std::vector<manager::MergeInput> inputs(24);
    for (std::size_t h = 0; h < 24; ++h) inputs[h].honeypot_id = "hp-" + std::to_string(h);
    for (std::size_t i = 0; i < records; ++i) {
        std::size_t h = rng() % 24;
        LogRecord rec;
        rec.timestamp_ms = static_cast<std::int64_t>(rng() % (7 * 86'400'000LL));
        rec.honeypot_id = inputs[h].honeypot_id;
        rec.kind = i % 3 == 0 ? LoggedKind::Hello : LoggedKind::RequestPart;
        rec.peer = anonymize::hash_ip(static_cast<std::uint32_t>(rng() % 4000), salt).hex();
        rec.peer_user_id = std::string(32, '0');
        rec.server_name = "main";
        rec.server_ip = "srv0";
        inputs[h].records.push_back(std::move(rec));
    }
    std::ostringstream out;
    manager::merge_records(std::move(inputs), out);
    std::istringstream in(out.str());
    auto res = analysis::parse_unified_log(in);
    return std::move(*res.log);
}

void BM_DistinctOverTime(benchmark::State& state) {
    auto log = make_log(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto series = analysis::distinct_peers_over_time(log, analysis::kMsPerHour);
        benchmark::DoNotOptimize(series);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DistinctOverTime)->Arg(100000);

void BM_HoneypotSubsetCurve(benchmark::State& state) {
    auto log = make_log(100000);
    for (auto _ : state) {
        auto curve = analysis::honeypot_subset_curve(log, 100, 7);
        benchmark::DoNotOptimize(curve);
    }
}
BENCHMARK(BM_HoneypotSubsetCurve);

void BM_TopFiles(benchmark::State& state) {
    auto log = make_log(100000);
    for (auto _ : state) {
        auto top = analysis::top_files_by_peers(log, 100);
        benchmark::DoNotOptimize(top);
    }
}
BENCHMARK(BM_TopFiles);

}  // namespace
