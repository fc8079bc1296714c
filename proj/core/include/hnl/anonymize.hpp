// SPDX-License-Identifier: Apache-2.0
// Two-step peer-IP anonymization and filename rare-word replacement.
//
// Step 1 runs inside each honeypot: the peer's IPv4 is replaced by a salted
// SHA-256 digest before anything is written to disk or shipped. Step 2 runs
// when logs are merged: each digest is replaced, coherently across all logs,
// by an integer in first-occurrence order, and the mapping table is discarded.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hnl::anonymize {

// Campaign-wide salt; shared by all honeypots of one campaign and kept only in
// process memory. Hardens step 1 against whole-IPv4-space dictionaries without
// affecting cross-honeypot coherence.
using Salt = std::array<std::uint8_t, 16>;

Salt salt_from_seed(std::uint64_t seed);
Salt random_salt();

struct IpToken {
    std::array<std::uint8_t, 32> digest{};

    std::string hex() const;
    bool operator==(const IpToken&) const = default;
};

// ip is the IPv4 address as a host-order u32 (a.b.c.d with a in the top byte).
IpToken hash_ip(std::uint32_t ip, const Salt& salt);

// 64 lowercase hex chars; the only token shape step-2 accepts.
bool is_ip_token(std::string_view s);

// Step 2: first distinct token seen -> 0, next -> 1, and so on. Strictly
// sequential; first-occurrence order is part of the contract.
class Renumberer {
public:
    std::uint64_t id_for(std::string_view token);
    std::uint64_t size() const { return next_; }

private:
    std::unordered_map<std::string, std::uint64_t> ids_;
    std::uint64_t next_ = 0;
};

// Replaces every word whose corpus frequency is below `threshold` with w0, w1,
// ... in first-occurrence order. Words are maximal ASCII-alphanumeric runs,
// counted case-insensitively; separators and kept words pass through verbatim.
std::vector<std::string> anonymize_filenames(const std::vector<std::string>& names,
                                             std::size_t threshold);

bool contains_dotted_quad(std::string_view s);

// Rewrites every dotted-quad substring as ip4-<hex8>. Applied to free-text
// fields of the published dataset (server address, peer/client names,
// filenames); peer addresses themselves never get this far.
std::string sweep_dotted_quads(std::string_view s);

std::string dotted_quad(std::uint32_t ip);
std::optional<std::uint32_t> parse_dotted_quad(std::string_view s);

}  // namespace hnl::anonymize
