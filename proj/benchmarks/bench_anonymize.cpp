// SPDX-License-Identifier: Apache-2.0
#include "hnl/anonymize.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace hnl::anonymize;

namespace {

void BM_HashIp(benchmark::State& state) {
    Salt salt = salt_from_seed(1);
    std::uint32_t ip = 0x0A010203;
    for (auto _ : state) {
        auto token = hash_ip(ip++, salt);
        benchmark::DoNotOptimize(token);
    }
}
BENCHMARK(BM_HashIp);

void BM_Renumber(benchmark::State& state) {
    Salt salt = salt_from_seed(2);
    std::mt19937_64 rng(3);
    std::vector<std::string> tokens;
    for (int i = 0; i < 4096; ++i) {
        tokens.push_back(hash_ip(static_cast<std::uint32_t>(rng() % 1000), salt).hex());
    }
    for (auto _ : state) {
        Renumberer renumber;
        std::uint64_t sum = 0;
        for (const auto& t : tokens) sum += renumber.id_for(t);
        benchmark::DoNotOptimize(sum);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * tokens.size()));
}
BENCHMARK(BM_Renumber);

void BM_FilenameThreshold(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::vector<std::string> names;
    const char* words[] = {"summer", "video", "live", "album", "mix", "night"};
    for (int i = 0; i < 2000; ++i) {
        std::string name;
        for (int w = 0; w < 3; ++w) name += std::string(words[rng() % 6]) + " ";
        name += "rare" + std::to_string(rng() % 1500);
        names.push_back(name);
    }
    for (auto _ : state) {
        auto out = anonymize_filenames(names, 5);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * names.size()));
}
BENCHMARK(BM_FilenameThreshold);

void BM_SweepDottedQuads(benchmark::State& state) {
    std::string line = "peer 10.1.2.3 talked to server 192.168.0.1 about file v1.2.3.4567";
    for (auto _ : state) {
        auto swept = sweep_dotted_quads(line);
        benchmark::DoNotOptimize(swept);
    }
}
BENCHMARK(BM_SweepDottedQuads);

}  // namespace
