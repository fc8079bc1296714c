// SPDX-License-Identifier: Apache-2.0
// Minimal SHA-256 (FIPS 180-4). Used for IP pseudonymization tokens.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace hnl {

class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    std::array<std::uint8_t, 32> finish();

    static std::array<std::uint8_t, 32> digest(std::span<const std::uint8_t> data) {
        Sha256 h;
        h.update(data.data(), data.size());
        return h.finish();
    }

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_{};
    std::uint64_t total_len_ = 0;
    std::array<std::uint8_t, 64> buf_{};
    std::size_t buf_len_ = 0;
};

}  // namespace hnl
