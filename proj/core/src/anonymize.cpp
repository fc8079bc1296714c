// SPDX-License-Identifier: Apache-2.0
#include "hnl/anonymize.hpp"

#include "hnl/bytes.hpp"
#include "hnl/sha256.hpp"

#include <cctype>
#include <cstdio>
#include <random>

namespace hnl::anonymize {

Salt salt_from_seed(std::uint64_t seed) {
    // splitmix64 expansion; good enough to decorrelate campaign salts.
    Salt salt{};
    std::uint64_t x = seed;
    for (int half = 0; half < 2; ++half) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        for (int i = 0; i < 8; ++i)
            salt[static_cast<std::size_t>(half * 8 + i)] = static_cast<std::uint8_t>(z >> (8 * i));
    }
    return salt;
}

Salt random_salt() {
    std::random_device rd;
    Salt salt{};
    for (std::size_t i = 0; i < salt.size(); i += 4) {
        std::uint32_t v = rd();
        for (std::size_t j = 0; j < 4; ++j) salt[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
    }
    return salt;
}

std::string IpToken::hex() const { return to_hex(digest); }

IpToken hash_ip(std::uint32_t ip, const Salt& salt) {
    std::uint8_t addr[4] = {
        static_cast<std::uint8_t>(ip >> 24),
        static_cast<std::uint8_t>(ip >> 16),
        static_cast<std::uint8_t>(ip >> 8),
        static_cast<std::uint8_t>(ip),
    };
    Sha256 h;
    h.update(addr, sizeof addr);
    h.update(salt.data(), salt.size());
    return IpToken{h.finish()};
}

bool is_ip_token(std::string_view s) {
    if (s.size() != 64) return false;
    for (char c : s) {
        bool lower_hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
        if (!lower_hex) return false;
    }
    return true;
}

std::uint64_t Renumberer::id_for(std::string_view token) {
    auto it = ids_.find(std::string(token));
    if (it != ids_.end()) return it->second;
    std::uint64_t id = next_++;
    ids_.emplace(std::string(token), id);
    return id;
}

namespace {

bool word_char(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

template <typename Fn>
void for_each_word(std::string_view name, Fn&& fn) {
    std::size_t i = 0;
    while (i < name.size()) {
        if (!word_char(name[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < name.size() && word_char(name[j])) ++j;
        fn(i, j);
        i = j;
    }
}

}  // namespace

std::vector<std::string> anonymize_filenames(const std::vector<std::string>& names,
                                             std::size_t threshold) {
    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& name : names) {
        for_each_word(name, [&](std::size_t b, std::size_t e) {
            freq[lower(std::string_view(name).substr(b, e - b))]++;
        });
    }

    std::unordered_map<std::string, std::uint64_t> rare_ids;
    std::uint64_t next_rare = 0;

    std::vector<std::string> out;
    out.reserve(names.size());
    for (const auto& name : names) {
        std::string rewritten;
        std::size_t copied = 0;
        for_each_word(name, [&](std::size_t b, std::size_t e) {
            std::string w = lower(std::string_view(name).substr(b, e - b));
            rewritten.append(name, copied, b - copied);
            copied = e;
            if (freq[w] < threshold) {
                auto it = rare_ids.find(w);
                if (it == rare_ids.end()) it = rare_ids.emplace(w, next_rare++).first;
                rewritten += "w" + std::to_string(it->second);
            } else {
                rewritten.append(name, b, e - b);
            }
        });
        rewritten.append(name, copied, name.size() - copied);
        // Frequent all-number words can reassemble an address around the kept
        // separators; addresses never survive, whatever their frequency.
        if (contains_dotted_quad(rewritten)) rewritten = sweep_dotted_quads(rewritten);
        out.push_back(std::move(rewritten));
    }
    return out;
}

namespace {

// Scans for d+.d+.d+.d+ with each part <= 255 and 1-3 digits.
struct QuadMatch {
    std::size_t begin, end;
    std::uint32_t value;
};

std::optional<QuadMatch> find_quad(std::string_view s, std::size_t from) {
    std::size_t i = from;
    while (i < s.size()) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        // A quad must not be glued to preceding digits.
        if (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            continue;
        }
        std::size_t j = i;
        std::uint32_t value = 0;
        int part = 0;
        bool ok = true;
        for (; part < 4; ++part) {
            if (part > 0) {
                if (j >= s.size() || s[j] != '.') {
                    ok = false;
                    break;
                }
                ++j;
            }
            std::size_t digits = 0;
            std::uint32_t v = 0;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])) && digits < 4) {
                v = v * 10 + static_cast<std::uint32_t>(s[j] - '0');
                ++digits;
                ++j;
            }
            if (digits == 0 || digits > 3 || v > 255) {
                ok = false;
                break;
            }
            value = (value << 8) | v;
        }
        // Trailing digit would make the last part longer than matched.
        if (ok && j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ok = false;
        if (ok) return QuadMatch{i, j, value};
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    }
    return std::nullopt;
}

}  // namespace

bool contains_dotted_quad(std::string_view s) { return find_quad(s, 0).has_value(); }

std::string sweep_dotted_quads(std::string_view s) {
    std::string out;
    std::size_t pos = 0;
    while (auto m = find_quad(s, pos)) {
        out.append(s.substr(pos, m->begin - pos));
        char buf[16];
        std::snprintf(buf, sizeof buf, "ip4-%08x", m->value);
        out += buf;
        pos = m->end;
    }
    out.append(s.substr(pos));
    return out;
}

std::string dotted_quad(std::uint32_t ip) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (ip >> 24) & 0xFF, (ip >> 16) & 0xFF,
                  (ip >> 8) & 0xFF, ip & 0xFF);
    return buf;
}

std::optional<std::uint32_t> parse_dotted_quad(std::string_view s) {
    auto m = find_quad(s, 0);
    if (!m || m->begin != 0 || m->end != s.size()) return std::nullopt;
    return m->value;
}

}  // namespace hnl::anonymize
