// SPDX-License-Identifier: Apache-2.0
#include "hnl/analysis.hpp"

#include "hnl/bytes.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace hnl::analysis {

std::uint32_t UnifiedLog::honeypot_index(const std::string& id) const {
    auto it = std::lower_bound(honeypot_ids.begin(), honeypot_ids.end(), id);
    if (it == honeypot_ids.end() || *it != id) return static_cast<std::uint32_t>(honeypot_ids.size());
    return static_cast<std::uint32_t>(it - honeypot_ids.begin());
}

LoadResult parse_unified_log(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) return {std::nullopt, "empty file"};
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kUnifiedLogMagic) return {std::nullopt, "missing #hnl1-unified header"};

    struct Raw {
        LogRecord rec;
        std::uint64_t peer;
    };
    std::vector<Raw> raws;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto rec = parse_log_line(line);
        if (!rec) return {std::nullopt, "malformed record at line " + std::to_string(line_no)};
        std::uint64_t peer = 0;
        auto [ptr, ec] = std::from_chars(rec->peer.data(), rec->peer.data() + rec->peer.size(), peer);
        if (ec != std::errc() || ptr != rec->peer.data() + rec->peer.size())
            return {std::nullopt, "non-integer peer id at line " + std::to_string(line_no)};
        raws.push_back({std::move(*rec), peer});
    }

    UnifiedLog log;
    for (const auto& r : raws) log.honeypot_ids.push_back(r.rec.honeypot_id);
    std::sort(log.honeypot_ids.begin(), log.honeypot_ids.end());
    log.honeypot_ids.erase(std::unique(log.honeypot_ids.begin(), log.honeypot_ids.end()),
                           log.honeypot_ids.end());

    std::vector<bool> seen;
    std::uint64_t max_id = 0;
    std::int64_t prev_ts = std::numeric_limits<std::int64_t>::min();
    log.records.reserve(raws.size());
    for (const auto& r : raws) {
        if (r.rec.timestamp_ms < prev_ts) return {std::nullopt, "records not time-sorted"};
        prev_ts = r.rec.timestamp_ms;
        Record rec;
        rec.timestamp_ms = r.rec.timestamp_ms;
        rec.honeypot = log.honeypot_index(r.rec.honeypot_id);
        rec.kind = r.rec.kind;
        rec.peer = r.peer;
        rec.file_id = r.rec.file_id;
        if (r.peer >= seen.size()) seen.resize(r.peer + 1, false);
        if (!seen[r.peer]) {
            seen[r.peer] = true;
            ++log.distinct_peers;
        }
        max_id = std::max(max_id, r.peer);
        log.records.push_back(rec);
    }
    if (!raws.empty() && max_id + 1 != log.distinct_peers)
        return {std::nullopt, "peer ids are not dense from 0"};
    return {std::move(log), ""};
}

LoadResult load_unified_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {std::nullopt, "cannot open " + path};
    return parse_unified_log(in);
}

FileTable load_file_table(const std::string& path) {
    FileTable table;
    std::ifstream in(path, std::ios::binary);
    if (!in) return table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            first = false;
            if (line.rfind(kUnifiedFilesMagic, 0) == 0 || line.rfind(kFilesMagic, 0) == 0) continue;
        }
        if (line.empty()) continue;
        // honeypot \t source \t file_id \t size \t name
        std::vector<std::string_view> f;
        std::string_view sv(line);
        std::size_t start = 0;
        for (std::size_t i = 0; i <= sv.size(); ++i) {
            if (i == sv.size() || sv[i] == '\t') {
                f.push_back(sv.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 5) continue;
        proto::FileId id{};
        if (!from_hex(f[2], id)) continue;
        std::uint64_t size = 0;
        auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), size);
        if (ec != std::errc()) continue;
        (void)ptr;
        if (f[1] == "advertised")
            table.advertised.insert(id);
        else if (f[1] == "shared")
            table.shared.insert(id);
        else
            continue;
        table.sizes.emplace(id, size);
    }
    return table;
}

// --- series helpers ----------------------------------------------------------

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

struct Span {
    std::int64_t first_bucket = 0;
    std::size_t buckets = 0;
};

Span span_of(const UnifiedLog& log, std::int64_t bucket_ms) {
    if (log.records.empty()) return {};
    std::int64_t lo = log.records.front().timestamp_ms;
    std::int64_t hi = log.records.back().timestamp_ms;
    std::int64_t b0 = floor_div(lo, bucket_ms);
    std::int64_t b1 = floor_div(hi, bucket_ms);
    return {b0, static_cast<std::size_t>(b1 - b0 + 1)};
}

std::size_t bucket_of(const Span& span, std::int64_t ts, std::int64_t bucket_ms) {
    return static_cast<std::size_t>(floor_div(ts, bucket_ms) - span.first_bucket);
}

Series make_series(std::string label, const std::vector<std::uint64_t>& values) {
    Series s;
    s.label = std::move(label);
    s.x.reserve(values.size());
    s.avg.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        s.x.push_back(static_cast<double>(i + 1));
        s.avg.push_back(static_cast<double>(values[i]));
    }
    return s;
}

std::string fmt_num(double v) {
    if (v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 9e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void write_series_csv(std::ostream& out, const Series& series) {
    if (series.has_band()) {
        out << "x,avg,min,max\n";
        for (std::size_t i = 0; i < series.x.size(); ++i) {
            out << fmt_num(series.x[i]) << ',' << fmt_num(series.avg[i]) << ','
                << fmt_num(series.min[i]) << ',' << fmt_num(series.max[i]) << '\n';
        }
    } else {
        out << "x,avg\n";
        for (std::size_t i = 0; i < series.x.size(); ++i) {
            out << fmt_num(series.x[i]) << ',' << fmt_num(series.avg[i]) << '\n';
        }
    }
}

void write_summary_csv(std::ostream& out, const SummaryTable& s) {
    out << "metric,value\n";
    out << "n_honeypots," << s.n_honeypots << '\n';
    out << "duration_days," << fmt_num(s.duration_days) << '\n';
    out << "n_shared_files," << s.n_shared_files << '\n';
    out << "n_distinct_peers," << s.n_distinct_peers << '\n';
    out << "n_distinct_files," << s.n_distinct_files << '\n';
    out << "total_distinct_file_bytes," << s.total_distinct_file_bytes << '\n';
}

SummaryTable summary_table(const UnifiedLog& log, const FileTable& files) {
    SummaryTable s;
    s.n_honeypots = log.honeypot_ids.size();
    s.n_distinct_peers = log.distinct_peers;
    if (!log.records.empty()) {
        s.duration_days = static_cast<double>(log.records.back().timestamp_ms -
                                              log.records.front().timestamp_ms) /
                          static_cast<double>(kMsPerDay);
    }
    s.n_shared_files = files.advertised.size();

    // Distinct files: queried in the log plus peer-shared observations.
    std::set<proto::FileId> distinct = files.shared;
    for (const auto& rec : log.records)
        if (rec.file_id) distinct.insert(*rec.file_id);
    s.n_distinct_files = distinct.size();
    for (const auto& id : distinct) {
        auto it = files.sizes.find(id);
        if (it != files.sizes.end()) s.total_distinct_file_bytes += it->second;
    }
    return s;
}

Series distinct_peers_over_time(const UnifiedLog& log, std::int64_t bucket_ms) {
    if (bucket_ms <= 0) throw std::invalid_argument("bucket must be positive");
    auto span = span_of(log, bucket_ms);
    std::vector<std::uint64_t> cumulative(span.buckets, 0);
    std::vector<bool> seen(log.distinct_peers, false);
    std::uint64_t running = 0;
    std::size_t rec_i = 0;
    for (std::size_t b = 0; b < span.buckets; ++b) {
        std::int64_t end = (span.first_bucket + static_cast<std::int64_t>(b) + 1) * bucket_ms;
        while (rec_i < log.records.size() && log.records[rec_i].timestamp_ms < end) {
            if (!seen[log.records[rec_i].peer]) {
                seen[log.records[rec_i].peer] = true;
                ++running;
            }
            ++rec_i;
        }
        cumulative[b] = running;
    }
    auto s = make_series("distinct-peers", cumulative);
    return s;
}

Series new_peers_per_day(const UnifiedLog& log) {
    auto cumulative = distinct_peers_over_time(log, kMsPerDay);
    Series s;
    s.label = "new-peers-per-day";
    s.x = cumulative.x;
    s.avg.reserve(cumulative.avg.size());
    for (std::size_t i = 0; i < cumulative.avg.size(); ++i) {
        s.avg.push_back(cumulative.avg[i] - (i == 0 ? 0.0 : cumulative.avg[i - 1]));
    }
    return s;
}

Series hourly_message_counts(const UnifiedLog& log, LoggedKind kind, std::int64_t bucket_ms) {
    if (bucket_ms <= 0) throw std::invalid_argument("bucket must be positive");
    auto span = span_of(log, bucket_ms);
    std::vector<std::uint64_t> counts(span.buckets, 0);
    for (const auto& rec : log.records) {
        if (rec.kind != kind) continue;
        counts[bucket_of(span, rec.timestamp_ms, bucket_ms)]++;
    }
    auto s = make_series(std::string("hourly-") + to_string(kind), counts);
    return s;
}

namespace {

// Group index per honeypot: 0 = no-content, 1 = random-content, -1 unknown.
std::vector<int> group_index(const UnifiedLog& log, const StrategyGroups& groups) {
    std::vector<int> idx(log.honeypot_ids.size(), -1);
    for (std::size_t i = 0; i < log.honeypot_ids.size(); ++i) {
        auto it = groups.find(log.honeypot_ids[i]);
        if (it != groups.end())
            idx[i] = it->second == honeypot::Strategy::NoContent ? 0 : 1;
    }
    return idx;
}

}  // namespace

std::vector<Series> per_strategy_series(const UnifiedLog& log, const StrategyGroups& groups,
                                        LoggedKind kind, SeriesMode mode, std::int64_t bucket_ms) {
    if (bucket_ms <= 0) throw std::invalid_argument("bucket must be positive");
    auto span = span_of(log, bucket_ms);
    auto gidx = group_index(log, groups);

    std::vector<std::vector<std::uint64_t>> out(2, std::vector<std::uint64_t>(span.buckets, 0));
    std::vector<std::vector<bool>> seen(2, std::vector<bool>(log.distinct_peers, false));
    std::uint64_t running[2] = {0, 0};
    std::size_t rec_i = 0;
    for (std::size_t b = 0; b < span.buckets; ++b) {
        std::int64_t end = (span.first_bucket + static_cast<std::int64_t>(b) + 1) * bucket_ms;
        while (rec_i < log.records.size() && log.records[rec_i].timestamp_ms < end) {
            const auto& rec = log.records[rec_i];
            int g = gidx[rec.honeypot];
            if (g >= 0 && rec.kind == kind) {
                if (mode == SeriesMode::MessageCount) {
                    ++running[g];
                } else if (!seen[static_cast<std::size_t>(g)][rec.peer]) {
                    seen[static_cast<std::size_t>(g)][rec.peer] = true;
                    ++running[g];
                }
            }
            ++rec_i;
        }
        out[0][b] = running[0];
        out[1][b] = running[1];
    }
    std::vector<Series> result;
    result.push_back(make_series("no-content", out[0]));
    result.push_back(make_series("random-content", out[1]));
    return result;
}

std::uint64_t top_peer(const UnifiedLog& log) {
    std::vector<std::uint64_t> counts(log.distinct_peers, 0);
    for (const auto& rec : log.records) counts[rec.peer]++;
    std::uint64_t best = 0, best_count = 0;
    for (std::uint64_t p = 0; p < counts.size(); ++p) {
        if (counts[p] > best_count) {
            best = p;
            best_count = counts[p];
        }
    }
    return best;
}

std::vector<Series> single_peer_timeline(const UnifiedLog& log, const StrategyGroups& groups,
                                         std::uint64_t peer, LoggedKind kind,
                                         std::int64_t bucket_ms) {
    if (bucket_ms <= 0) throw std::invalid_argument("bucket must be positive");
    auto span = span_of(log, bucket_ms);
    auto gidx = group_index(log, groups);

    std::vector<std::vector<std::uint64_t>> out(2, std::vector<std::uint64_t>(span.buckets, 0));
    std::uint64_t running[2] = {0, 0};
    std::size_t rec_i = 0;
    for (std::size_t b = 0; b < span.buckets; ++b) {
        std::int64_t end = (span.first_bucket + static_cast<std::int64_t>(b) + 1) * bucket_ms;
        while (rec_i < log.records.size() && log.records[rec_i].timestamp_ms < end) {
            const auto& rec = log.records[rec_i];
            int g = gidx[rec.honeypot];
            if (g >= 0 && rec.peer == peer && rec.kind == kind) ++running[g];
            ++rec_i;
        }
        out[0][b] = running[0];
        out[1][b] = running[1];
    }
    std::vector<Series> result;
    result.push_back(make_series("no-content", out[0]));
    result.push_back(make_series("random-content", out[1]));
    return result;
}

// --- resampling ---------------------------------------------------------------

namespace {

// Fixed-width bitset over dense peer ids.
struct PeerBits {
    std::vector<std::uint64_t> words;

    explicit PeerBits(std::uint64_t peers) : words((peers + 63) / 64, 0) {}
    void set(std::uint64_t p) { words[p >> 6] |= 1ULL << (p & 63); }
};

std::uint64_t union_count(const std::vector<PeerBits>& sets, const std::vector<std::size_t>& pick,
                          std::size_t words) {
    std::uint64_t count = 0;
    for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t acc = 0;
        for (std::size_t idx : pick) acc |= sets[idx].words[w];
        count += static_cast<std::uint64_t>(__builtin_popcountll(acc));
    }
    return count;
}

// C(n, k) capped at `cap` to avoid overflow.
std::uint64_t combinations_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;  // exact at every step in this order
        if (result > cap) return cap + 1;
    }
    return static_cast<std::uint64_t>(result);
}

ResamplePoint resample_sets(const std::vector<PeerBits>& sets, std::size_t n, std::uint64_t trials,
                            std::uint64_t seed) {
    const std::size_t total = sets.size();
    if (n > total) throw std::invalid_argument("subset size exceeds population");
    const std::size_t words = sets.empty() ? 0 : sets[0].words.size();

    ResamplePoint point;
    if (n == 0) {
        point.trial_count = 1;
        point.exhaustive = true;
        return point;
    }

    bool first = true;
    auto feed = [&](std::uint64_t size) {
        point.trial_sum += size;
        point.trial_count += 1;
        if (first || size < point.min) point.min = size;
        if (first || size > point.max) point.max = size;
        first = false;
    };

    if (combinations_capped(total, n, trials) <= trials) {
        // Exhaustive: lexicographic combinations.
        point.exhaustive = true;
        std::vector<std::size_t> pick(n);
        for (std::size_t i = 0; i < n; ++i) pick[i] = i;
        while (true) {
            feed(union_count(sets, pick, words));
            // next combination
            std::size_t i = n;
            while (i > 0) {
                --i;
                if (pick[i] != i + total - n) {
                    ++pick[i];
                    for (std::size_t j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
                    break;
                }
                if (i == 0) {
                    point.avg = static_cast<double>(point.trial_sum) /
                                static_cast<double>(point.trial_count);
                    return point;
                }
            }
        }
    }

    // Random trials: schedule-independent per-trial generators.
    std::vector<std::size_t> indices(total);
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(seed ^ t);
        for (std::size_t i = 0; i < total; ++i) indices[i] = i;
        // Partial Fisher-Yates: first n entries become the sample.
        std::vector<std::size_t> pick(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng() % (total - i));
            std::swap(indices[i], indices[j]);
            pick[i] = indices[i];
        }
        feed(union_count(sets, pick, words));
    }
    point.avg = static_cast<double>(point.trial_sum) / static_cast<double>(point.trial_count);
    return point;
}

std::vector<PeerBits> honeypot_peer_sets(const UnifiedLog& log) {
    std::vector<PeerBits> sets(log.honeypot_ids.size(), PeerBits(log.distinct_peers));
    for (const auto& rec : log.records) sets[rec.honeypot].set(rec.peer);
    return sets;
}

std::vector<PeerBits> file_peer_sets(const UnifiedLog& log,
                                     const std::vector<proto::FileId>& file_set) {
    std::map<proto::FileId, std::size_t> index;
    for (std::size_t i = 0; i < file_set.size(); ++i) index.emplace(file_set[i], i);
    std::vector<PeerBits> sets(file_set.size(), PeerBits(log.distinct_peers));
    for (const auto& rec : log.records) {
        if (!rec.file_id) continue;
        auto it = index.find(*rec.file_id);
        if (it != index.end()) sets[it->second].set(rec.peer);
    }
    return sets;
}

Series curve_of(std::string label, const std::vector<PeerBits>& sets, std::uint64_t trials,
                std::uint64_t seed) {
    Series s;
    s.label = std::move(label);
    for (std::size_t n = 0; n <= sets.size(); ++n) {
        auto point = resample_sets(sets, n, trials, seed);
        s.x.push_back(static_cast<double>(n));
        s.avg.push_back(point.avg);
        s.min.push_back(static_cast<double>(point.min));
        s.max.push_back(static_cast<double>(point.max));
    }
    return s;
}

}  // namespace

ResamplePoint resample_honeypot_subsets(const UnifiedLog& log, std::size_t n, std::uint64_t trials,
                                        std::uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("trials must be positive");
    return resample_sets(honeypot_peer_sets(log), n, trials, seed);
}

Series honeypot_subset_curve(const UnifiedLog& log, std::uint64_t trials, std::uint64_t seed) {
    return curve_of("honeypot-subsets", honeypot_peer_sets(log), trials, seed);
}

ResamplePoint resample_file_subsets(const UnifiedLog& log,
                                    const std::vector<proto::FileId>& file_set, std::size_t n,
                                    std::uint64_t trials, std::uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("trials must be positive");
    return resample_sets(file_peer_sets(log, file_set), n, trials, seed);
}

Series file_subset_curve(const UnifiedLog& log, const std::vector<proto::FileId>& file_set,
                         std::uint64_t trials, std::uint64_t seed) {
    return curve_of("file-subsets", file_peer_sets(log, file_set), trials, seed);
}

std::vector<proto::FileId> top_files_by_peers(const UnifiedLog& log, std::size_t k) {
    std::map<proto::FileId, std::set<std::uint64_t>> peers_by_file;
    for (const auto& rec : log.records)
        if (rec.file_id) peers_by_file[*rec.file_id].insert(rec.peer);

    std::vector<std::pair<proto::FileId, std::size_t>> ranked;
    ranked.reserve(peers_by_file.size());
    for (const auto& [id, peers] : peers_by_file) ranked.emplace_back(id, peers.size());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<proto::FileId> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].first);
    return out;
}

std::vector<proto::FileId> queried_files(const UnifiedLog& log) {
    std::set<proto::FileId> files;
    for (const auto& rec : log.records)
        if (rec.file_id) files.insert(*rec.file_id);
    return {files.begin(), files.end()};
}

}  // namespace hnl::analysis
