// SPDX-License-Identifier: Apache-2.0
// Measurement analytics over a unified log: activity series, per-strategy
// comparisons, and subset-resampling studies, emitted as CSV.
//
// Conventions:
//   - Buckets are aligned to the Unix epoch: bucket k covers
//     [k*bucket_ms, (k+1)*bucket_ms). A series spans every bucket between the
//     first and last record. Day boundaries fall at UTC midnight.
//   - x values are 1-based bucket ordinals within the series span.
//   - Resampled points carry avg/min/max over trials; avg is the integer
//     trial sum divided by the trial count.
#pragma once

#include "hnl/honeypot.hpp"
#include "hnl/logrec.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hnl::analysis {

inline constexpr std::int64_t kMsPerHour = 3'600'000;
inline constexpr std::int64_t kMsPerDay = 86'400'000;

struct Record {
    std::int64_t timestamp_ms = 0;
    std::uint32_t honeypot = 0;  // index into UnifiedLog::honeypot_ids
    LoggedKind kind = LoggedKind::Hello;
    std::uint64_t peer = 0;
    std::optional<proto::FileId> file_id;
};

struct UnifiedLog {
    std::vector<Record> records;          // time-sorted
    std::vector<std::string> honeypot_ids;  // sorted, unique
    std::uint64_t distinct_peers = 0;     // ids are dense 0..distinct_peers-1

    std::uint32_t honeypot_index(const std::string& id) const;
};

struct LoadResult {
    std::optional<UnifiedLog> log;
    std::string error;
};

// Validates the #hnl1-unified header, per-line syntax, time-sortedness and
// peer-id density.
LoadResult load_unified_log(const std::string& path);
LoadResult parse_unified_log(std::istream& in);

// files.tsv: advertised + peer-shared file metadata.
struct FileTable {
    std::set<proto::FileId> advertised;
    std::set<proto::FileId> shared;
    std::map<proto::FileId, std::uint64_t> sizes;
};

FileTable load_file_table(const std::string& path);

// --- series -----------------------------------------------------------------

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> avg;
    std::vector<double> min;  // empty unless the series is resampled
    std::vector<double> max;
    bool has_band() const { return !min.empty(); }
};

void write_series_csv(std::ostream& out, const Series& series);

struct SummaryTable {
    std::uint64_t n_honeypots = 0;
    double duration_days = 0.0;
    std::uint64_t n_shared_files = 0;
    std::uint64_t n_distinct_peers = 0;
    std::uint64_t n_distinct_files = 0;
    std::uint64_t total_distinct_file_bytes = 0;
};

void write_summary_csv(std::ostream& out, const SummaryTable& summary);

SummaryTable summary_table(const UnifiedLog& log, const FileTable& files);

// Cumulative distinct peers through the end of each bucket.
Series distinct_peers_over_time(const UnifiedLog& log, std::int64_t bucket_ms);

// First difference of the daily cumulative distinct-peer series.
Series new_peers_per_day(const UnifiedLog& log);

// Message (not distinct-peer) counts per bucket.
Series hourly_message_counts(const UnifiedLog& log, LoggedKind kind,
                             std::int64_t bucket_ms = kMsPerHour);

enum class SeriesMode : std::uint8_t { DistinctPeers, MessageCount };

using StrategyGroups = std::map<std::string, honeypot::Strategy>;

// One cumulative series per strategy group (no-content first).
std::vector<Series> per_strategy_series(const UnifiedLog& log, const StrategyGroups& groups,
                                        LoggedKind kind, SeriesMode mode, std::int64_t bucket_ms);

// The peer that sent the largest number of queries (ties: smallest id).
std::uint64_t top_peer(const UnifiedLog& log);

// Cumulative per-bucket counts of `kind` from one peer toward each group.
std::vector<Series> single_peer_timeline(const UnifiedLog& log, const StrategyGroups& groups,
                                         std::uint64_t peer, LoggedKind kind,
                                         std::int64_t bucket_ms);

// --- resampling -------------------------------------------------------------

struct ResamplePoint {
    double avg = 0.0;
    std::uint64_t min = 0;
    std::uint64_t max = 0;
    std::uint64_t trial_sum = 0;
    std::uint64_t trial_count = 0;
    bool exhaustive = false;
};

// Distinct peers observed by n honeypots, over `trials` random n-subsets
// (exhaustive enumeration whenever C(N,n) <= trials). Throws
// std::invalid_argument when n exceeds the honeypot count.
ResamplePoint resample_honeypot_subsets(const UnifiedLog& log, std::size_t n,
                                        std::uint64_t trials, std::uint64_t seed);

Series honeypot_subset_curve(const UnifiedLog& log, std::uint64_t trials, std::uint64_t seed);

// Distinct peers querying at least one of n files from `file_set`.
ResamplePoint resample_file_subsets(const UnifiedLog& log,
                                    const std::vector<proto::FileId>& file_set, std::size_t n,
                                    std::uint64_t trials, std::uint64_t seed);

Series file_subset_curve(const UnifiedLog& log, const std::vector<proto::FileId>& file_set,
                         std::uint64_t trials, std::uint64_t seed);

// The k files queried by the largest number of distinct peers
// (ties: ascending file_id).
std::vector<proto::FileId> top_files_by_peers(const UnifiedLog& log, std::size_t k);

// All file ids queried in the log, ascending.
std::vector<proto::FileId> queried_files(const UnifiedLog& log);

}  // namespace hnl::analysis
