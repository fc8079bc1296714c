// SPDX-License-Identifier: Apache-2.0
#include "hnl/manager.hpp"

#include "hnl/anonymize.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

using namespace hnl;

namespace {

std::vector<manager::MergeInput> make_inputs(std::size_t honeypots, std::size_t records_each) {
    auto salt = anonymize::salt_from_seed(1);
    std::mt19937_64 rng(2);
    std::vector<manager::MergeInput> inputs(honeypots);
    for (std::size_t h = 0; h < honeypots; ++h) {
        inputs[h].honeypot_id = "hp-" + std::to_string(h);
        for (std::size_t i = 0; i < records_each; ++i) {
            LogRecord rec;
            rec.timestamp_ms = static_cast<std::int64_t>(rng() % 86'400'000);
            rec.honeypot_id = inputs[h].honeypot_id;
            rec.kind = LoggedKind::Hello;
            rec.peer = anonymize::hash_ip(static_cast<std::uint32_t>(rng() % 5000), salt).hex();
            rec.peer_user_id = std::string(32, '0');
            rec.server_name = "main";
            rec.server_ip = "srv0";
            inputs[h].records.push_back(std::move(rec));
        }
    }
    return inputs;
}

void BM_MergeRecords(benchmark::State& state) {
    auto base = make_inputs(24, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto inputs = base;  // merge consumes its input
        std::ostringstream out;
        auto stats = manager::merge_records(std::move(inputs), out);
        benchmark::DoNotOptimize(stats);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 24);
}
BENCHMARK(BM_MergeRecords)->Arg(1000)->Arg(10000);

void BM_ParseLogLine(benchmark::State& state) {
    auto salt = anonymize::salt_from_seed(1);
    LogRecord rec;
    rec.timestamp_ms = 123456789;
    rec.honeypot_id = "hp-001";
    rec.kind = LoggedKind::RequestPart;
    rec.peer = anonymize::hash_ip(0x0A000001, salt).hex();
    rec.peer_user_id = std::string(32, 'a');
    rec.server_name = "main";
    rec.server_ip = "srv0";
    rec.file_id = proto::FileId{};
    rec.ranges = {{0, 180224}, {180224, 65536}};
    auto line = format_log_line(rec);
    for (auto _ : state) {
        auto parsed = parse_log_line(line);
        benchmark::DoNotOptimize(parsed);
    }
}
BENCHMARK(BM_ParseLogLine);

}  // namespace
