// SPDX-License-Identifier: Apache-2.0
#include "hnl/protocol.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace hnl::proto;

namespace {

Hello sample_hello() {
    Hello hello;
    for (std::size_t i = 0; i < 16; ++i) hello.peer.user_id[i] = static_cast<std::uint8_t>(i);
    hello.peer.client_id = 0x51234567;
    hello.port = 4662;
    hello.client_name = "bench client 0.49";
    hello.client_version = 60;
    return hello;
}

OfferFiles sample_offer(std::size_t n) {
    OfferFiles offer;
    std::mt19937_64 rng(7);
    for (std::size_t i = 0; i < n; ++i) {
        FileMeta meta;
        for (auto& b : meta.file_id) b = static_cast<std::uint8_t>(rng());
        meta.name = "some shared file name " + std::to_string(i) + ".avi";
        meta.size = 700 * 1024 * 1024;
        offer.files.push_back(std::move(meta));
    }
    return offer;
}

void BM_EncodeHello(benchmark::State& state) {
    Message msg = sample_hello();
    for (auto _ : state) {
        auto frame = encode_message(msg);
        benchmark::DoNotOptimize(frame);
    }
}
BENCHMARK(BM_EncodeHello);

void BM_DecodeHello(benchmark::State& state) {
    auto frame = encode_message(Message{sample_hello()});
    for (auto _ : state) {
        auto decoded = decode_message(frame);
        benchmark::DoNotOptimize(decoded);
    }
}
BENCHMARK(BM_DecodeHello);

void BM_DecodeOfferFiles(benchmark::State& state) {
    auto frame = encode_message(Message{sample_offer(static_cast<std::size_t>(state.range(0)))});
    for (auto _ : state) {
        auto decoded = decode_message(frame);
        benchmark::DoNotOptimize(decoded);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * frame.size()));
}
BENCHMARK(BM_DecodeOfferFiles)->Arg(4)->Arg(64)->Arg(1024);

void BM_DecodeGarbage(benchmark::State& state) {
    std::mt19937_64 rng(11);
    std::vector<std::uint8_t> buf(256);
    for (auto& b : buf) b = static_cast<std::uint8_t>(rng());
    for (auto _ : state) {
        auto decoded = decode_message(buf);
        benchmark::DoNotOptimize(decoded);
    }
}
BENCHMARK(BM_DecodeGarbage);

}  // namespace
