// SPDX-License-Identifier: Apache-2.0
#include "oracle.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hnl::test::oracle {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

struct Span {
    std::int64_t first_bucket = 0;
    std::size_t buckets = 0;
};

Span span_of(const Log& log, std::int64_t bucket_ms) {
    if (log.recs.empty()) return {};
    std::int64_t lo = log.recs.front().ts, hi = log.recs.front().ts;
    for (const auto& r : log.recs) {
        lo = std::min(lo, r.ts);
        hi = std::max(hi, r.ts);
    }
    std::int64_t b0 = floor_div(lo, bucket_ms);
    std::int64_t b1 = floor_div(hi, bucket_ms);
    return {b0, static_cast<std::size_t>(b1 - b0 + 1)};
}

}  // namespace

bool load_unified(const std::string& path, Log& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "#hnl1-unified") return false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_tabs(line);
        if (f.size() != 14) return false;
        Rec rec;
        try {
            rec.ts = std::stoll(f[0]);
            rec.peer = std::stoull(f[3]);
        } catch (...) {
            return false;
        }
        rec.honeypot = f[1];
        rec.kind = f[2];
        if (f[12] != "-") rec.file_hex = f[12];
        out.recs.push_back(std::move(rec));
    }
    return true;
}

bool load_files_tsv(const std::string& path, FileInfo& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "#hnl1-files-unified") return false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_tabs(line);
        if (f.size() != 5) return false;
        if (f[1] == "advertised")
            out.advertised.insert(f[2]);
        else if (f[1] == "shared")
            out.shared.insert(f[2]);
        else
            return false;
        try {
            auto size = std::stoull(f[3]);
            if (out.sizes.count(f[2]) == 0) out.sizes[f[2]] = size;
        } catch (...) {
            return false;
        }
    }
    return true;
}

Summary summary(const Log& log, const FileInfo& files) {
    Summary s;
    std::set<std::string> honeypots;
    std::set<std::uint64_t> peers;
    std::set<std::string> observed_files;
    std::int64_t lo = 0, hi = 0;
    bool first = true;
    for (const auto& r : log.recs) {
        honeypots.insert(r.honeypot);
        peers.insert(r.peer);
        if (!r.file_hex.empty()) observed_files.insert(r.file_hex);
        if (first) {
            lo = hi = r.ts;
            first = false;
        } else {
            lo = std::min(lo, r.ts);
            hi = std::max(hi, r.ts);
        }
    }
    for (const auto& f : files.shared) observed_files.insert(f);
    s.n_honeypots = honeypots.size();
    s.duration_days = log.recs.empty() ? 0.0 : static_cast<double>(hi - lo) / 86'400'000.0;
    s.n_shared_files = files.advertised.size();
    s.n_distinct_peers = peers.size();
    s.n_distinct_files = observed_files.size();
    for (const auto& f : observed_files) {
        auto it = files.sizes.find(f);
        if (it != files.sizes.end()) s.total_bytes += it->second;
    }
    return s;
}

std::vector<std::uint64_t> cumulative_distinct(const Log& log, std::int64_t bucket_ms) {
    auto span = span_of(log, bucket_ms);
    std::vector<std::uint64_t> out(span.buckets, 0);
    for (std::size_t b = 0; b < span.buckets; ++b) {
        std::int64_t end = (span.first_bucket + static_cast<std::int64_t>(b) + 1) * bucket_ms;
        std::set<std::uint64_t> seen;
        for (const auto& r : log.recs)
            if (r.ts < end) seen.insert(r.peer);
        out[b] = seen.size();
    }
    return out;
}

std::vector<std::uint64_t> new_per_day(const Log& log) {
    auto cum = cumulative_distinct(log, 86'400'000);
    std::vector<std::uint64_t> out(cum.size(), 0);
    for (std::size_t i = 0; i < cum.size(); ++i) out[i] = cum[i] - (i == 0 ? 0 : cum[i - 1]);
    return out;
}

std::vector<std::uint64_t> bucket_counts(const Log& log, const std::string& kind,
                                         std::int64_t bucket_ms) {
    auto span = span_of(log, bucket_ms);
    std::vector<std::uint64_t> out(span.buckets, 0);
    for (const auto& r : log.recs) {
        if (r.kind != kind) continue;
        std::int64_t b = floor_div(r.ts, bucket_ms) - span.first_bucket;
        out[static_cast<std::size_t>(b)]++;
    }
    return out;
}

std::vector<std::uint64_t> group_cumulative_distinct(const Log& log,
                                                     const std::set<std::string>& group,
                                                     const std::string& kind,
                                                     std::int64_t bucket_ms) {
    auto span = span_of(log, bucket_ms);
    std::vector<std::uint64_t> out(span.buckets, 0);
    for (std::size_t b = 0; b < span.buckets; ++b) {
        std::int64_t end = (span.first_bucket + static_cast<std::int64_t>(b) + 1) * bucket_ms;
        std::set<std::uint64_t> seen;
        for (const auto& r : log.recs)
            if (r.ts < end && r.kind == kind && group.count(r.honeypot) != 0) seen.insert(r.peer);
        out[b] = seen.size();
    }
    return out;
}

std::vector<std::uint64_t> group_cumulative_count(const Log& log,
                                                  const std::set<std::string>& group,
                                                  const std::string& kind,
                                                  std::int64_t bucket_ms) {
    auto span = span_of(log, bucket_ms);
    std::vector<std::uint64_t> out(span.buckets, 0);
    for (std::size_t b = 0; b < span.buckets; ++b) {
        std::int64_t end = (span.first_bucket + static_cast<std::int64_t>(b) + 1) * bucket_ms;
        std::uint64_t count = 0;
        for (const auto& r : log.recs)
            if (r.ts < end && r.kind == kind && group.count(r.honeypot) != 0) ++count;
        out[b] = count;
    }
    return out;
}

std::uint64_t busiest_peer(const Log& log) {
    std::map<std::uint64_t, std::uint64_t> counts;
    for (const auto& r : log.recs) counts[r.peer]++;
    std::uint64_t best = 0, best_count = 0;
    for (const auto& [peer, count] : counts) {
        if (count > best_count) {  // map iterates ascending: ties keep smallest
            best = peer;
            best_count = count;
        }
    }
    return best;
}

std::vector<std::uint64_t> peer_cumulative_count(const Log& log, const std::set<std::string>& group,
                                                 std::uint64_t peer, const std::string& kind,
                                                 std::int64_t bucket_ms) {
    auto span = span_of(log, bucket_ms);
    std::vector<std::uint64_t> out(span.buckets, 0);
    for (std::size_t b = 0; b < span.buckets; ++b) {
        std::int64_t end = (span.first_bucket + static_cast<std::int64_t>(b) + 1) * bucket_ms;
        std::uint64_t count = 0;
        for (const auto& r : log.recs)
            if (r.ts < end && r.peer == peer && r.kind == kind && group.count(r.honeypot) != 0)
                ++count;
        out[b] = count;
    }
    return out;
}

std::vector<std::string> top_files(const Log& log, std::size_t k) {
    std::map<std::string, std::set<std::uint64_t>> peers_by_file;
    for (const auto& r : log.recs)
        if (!r.file_hex.empty()) peers_by_file[r.file_hex].insert(r.peer);
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (const auto& [file, peers] : peers_by_file) ranked.emplace_back(file, peers.size());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].first);
    return out;
}

SubsetStats exhaustive_subsets(const std::vector<std::set<std::uint64_t>>& sets, std::size_t n) {
    SubsetStats stats;
    const std::size_t total = sets.size();
    if (n > total) return stats;
    if (n == 0) {
        stats.count = 1;
        return stats;
    }
    // Walk every bitmask with popcount n.
    bool first = true;
    for (std::uint64_t mask = 0; mask < (1ULL << total); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcountll(mask)) != n) continue;
        std::set<std::uint64_t> u;
        for (std::size_t i = 0; i < total; ++i)
            if (mask & (1ULL << i)) u.insert(sets[i].begin(), sets[i].end());
        std::uint64_t size = u.size();
        stats.sum += size;
        stats.count += 1;
        if (first || size < stats.min) stats.min = size;
        if (first || size > stats.max) stats.max = size;
        first = false;
    }
    return stats;
}

}  // namespace hnl::test::oracle
