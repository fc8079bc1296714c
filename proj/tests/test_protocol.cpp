// SPDX-License-Identifier: Apache-2.0
#include "hnl/protocol.hpp"

#include "hnl/bytes.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <random>

using namespace hnl;
using namespace hnl::proto;

namespace {

std::vector<std::uint8_t> bytes_of(std::initializer_list<int> xs) {
    std::vector<std::uint8_t> v;
    for (int x : xs) v.push_back(static_cast<std::uint8_t>(x));
    return v;
}

}  // namespace

TEST_CASE("minimal all-zero hello frame") {
    Hello hello;  // user_id 0^16, client_id 0, port 0, name "", version 0
    auto frame = encode_message(hello);

    // payload: 16 (user) + 4 (client_id) + 2 (port) + 2 (name len) + 4 (version) = 28
    REQUIRE(frame.size() == 5 + 1 + 28);
    CHECK(frame[0] == 0xE3);
    CHECK(frame[1] == 29);  // N = opcode + payload
    CHECK(frame[2] == 0);
    CHECK(frame[3] == 0);
    CHECK(frame[4] == 0);
    CHECK(frame[5] == 0x01);
    for (std::size_t i = 6; i < frame.size(); ++i) CHECK(frame[i] == 0);
}

TEST_CASE("start-upload frame layout, hand-computed") {
    FileId id{};
    for (int i = 0; i < 16; ++i) id[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    auto frame = encode_message(StartUpload{id});

    // 5-byte header + opcode + 16-byte hash = 22 bytes total
    std::vector<std::uint8_t> expected =
        bytes_of({0xE3, 0x11, 0x00, 0x00, 0x00, 0x54,
                  0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07,
                  0x08, 0x09, 0x0A, 0x0B, 0x0C, 0x0D, 0x0E, 0x0F});
    CHECK(frame == expected);
    CHECK(frame.size() == 22);
}

TEST_CASE("frame length field always equals opcode+payload byte count") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        auto frame = encode_message(test::random_message(rng));
        std::uint32_t n = 0;
        for (int b = 4; b >= 1; --b) n = (n << 8) | frame[static_cast<std::size_t>(b)];
        CHECK(frame.size() == 5 + static_cast<std::size_t>(n));
    }
}

TEST_CASE("round-trip identity over generated messages") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 5000; ++i) {
        Message msg = test::random_message(rng);
        auto frame = encode_message(msg);
        auto decoded = decode_message(frame);
        REQUIRE(decoded.ok());
        CHECK(*decoded.message == msg);
    }
}

TEST_CASE("decode error variants are distinct and stable") {
    CHECK(decode_message({}).error == DecodeError::Truncated);

    auto bad_magic = bytes_of({0x00, 0x01, 0x00, 0x00, 0x00, 0x4A});
    CHECK(decode_message(bad_magic).error == DecodeError::BadMagic);

    auto only_magic = bytes_of({0xE3});
    CHECK(decode_message(only_magic).error == DecodeError::Truncated);

    // Header says N=17 but only part of the payload present.
    auto short_frame = bytes_of({0xE3, 0x11, 0x00, 0x00, 0x00, 0x54, 0x01, 0x02});
    CHECK(decode_message(short_frame).error == DecodeError::Truncated);

    // One spurious byte after a well-formed ASK-SHARED-LIST.
    auto ask = encode_message(AskSharedList{});
    ask.push_back(0x00);
    CHECK(decode_message(ask).error == DecodeError::LengthMismatch);

    auto unknown = bytes_of({0xE3, 0x01, 0x00, 0x00, 0x00, 0x99});
    CHECK(decode_message(unknown).error == DecodeError::UnknownOpcode);

    // ASK-SHARED-LIST must carry an empty payload.
    auto ask_payload = bytes_of({0xE3, 0x02, 0x00, 0x00, 0x00, 0x4A, 0x00});
    CHECK(decode_message(ask_payload).error == DecodeError::MalformedPayload);

    // Control opcodes are not peer-protocol messages.
    auto control = bytes_of({0xE3, 0x02, 0x00, 0x00, 0x00, 0xF1, 0x00});
    CHECK(decode_message(control).error == DecodeError::UnknownOpcode);
}

TEST_CASE("request-part rejects an empty range list") {
    // file_id + count=0
    std::vector<std::uint8_t> payload(16, 0xAB);
    for (int i = 0; i < 4; ++i) payload.push_back(0);
    auto frame = encode_frame(0x47, payload);
    CHECK(decode_message(frame).error == DecodeError::MalformedPayload);
}

TEST_CASE("file list with zero-size file is malformed") {
    ByteWriter w;
    w.u32le(1);
    FileId id{};
    w.raw(id);
    w.str16("x");
    w.u64le(0);  // size must be > 0
    auto frame = encode_frame(0x15, w.bytes());
    CHECK(decode_message(frame).error == DecodeError::MalformedPayload);
}

TEST_CASE("insane list count is malformed, not an allocation") {
    ByteWriter w;
    w.u32le(0xFFFFFFFFu);
    auto frame = encode_frame(0x15, w.bytes());
    CHECK(decode_message(frame).error == DecodeError::MalformedPayload);
}

TEST_CASE("oversize payload refuses to encode") {
    SendPart part;
    part.data.resize(kMaxPayload + 1);
    CHECK_THROWS_AS((void)encode_message(Message{std::move(part)}), EncodeError);
}

TEST_CASE("decode is total on random bytes and mutated frames") {
    std::mt19937_64 rng(1234);
    std::vector<std::uint8_t> buf;
    int decoded_ok = 0;
    for (int i = 0; i < 10000; ++i) {
        if (i % 3 == 0) {
            // Mutated valid frame: flip a few bytes.
            buf = encode_message(test::random_message(rng));
            for (int k = 0; k < 3 && !buf.empty(); ++k) {
                buf[rng() % buf.size()] = static_cast<std::uint8_t>(rng());
            }
        } else {
            buf.resize(rng() % 600);
            for (auto& b : buf) b = static_cast<std::uint8_t>(rng());
        }
        auto res = decode_message(buf);
        if (res.ok()) {
            ++decoded_ok;
            // Whatever decodes must re-encode to the identical frame.
            auto frame2 = encode_message(*res.message);
            CHECK(frame2 == buf);
        }
    }
    // The mutation path produces some survivors; pure noise almost never does.
    CHECK(decoded_ok > 0);
}
