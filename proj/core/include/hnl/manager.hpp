// SPDX-License-Identifier: Apache-2.0
// Manager duties: supervise honeypots (staleness restarts, quarantine) and
// gather + merge their logs into the unified, fully anonymized dataset.
#pragma once

#include "hnl/honeypot.hpp"
#include "hnl/logrec.hpp"
#include "hnl/plan.hpp"

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hnl::manager {

struct HoneypotStatus {
    std::string honeypot_id;
    bool connected = false;
    std::optional<std::uint32_t> client_id;
    proto::IdStatus id_status = proto::IdStatus::Low;
    std::int64_t last_seen_ms = 0;
    std::uint32_t restarts = 0;
};

struct SupervisorAction {
    enum class Kind : std::uint8_t { Restart, Quarantine };
    Kind kind = Kind::Restart;
    std::string honeypot_id;
    honeypot::ServerInfo server;  // where to (re)connect on Restart
};

struct SupervisorConfig {
    double poll_interval_s = 30.0;
    std::uint32_t max_restarts_per_hour = 5;
    std::vector<honeypot::ServerInfo> server_pool;  // alternates for redirects
};

// A honeypot is stale when last_seen falls behind now by more than
// 3 x poll_interval. Each stale sighting yields one Restart; more than
// max_restarts_per_hour within a rolling hour quarantines the honeypot.
class Supervisor {
public:
    explicit Supervisor(SupervisorConfig cfg) : cfg_(std::move(cfg)) {}

    std::vector<SupervisorAction> supervise(const std::vector<HoneypotStatus>& statuses,
                                            std::int64_t now_ms);

    bool quarantined(const std::string& honeypot_id) const {
        return quarantined_.count(honeypot_id) != 0;
    }
    std::uint32_t restart_count(const std::string& honeypot_id) const;

private:
    SupervisorConfig cfg_;
    std::map<std::string, std::deque<std::int64_t>> history_;  // restart times, rolling hour
    std::map<std::string, std::uint32_t> totals_;
    std::set<std::string> quarantined_;
};

// --- gather & merge ---------------------------------------------------------

struct MergeStats {
    std::size_t sources = 0;
    std::uint64_t records_in = 0;
    std::uint64_t records_out = 0;
    std::uint64_t malformed = 0;
    std::uint64_t distinct_peers = 0;
};

struct MergeInput {
    std::string honeypot_id;
    std::vector<LogRecord> records;  // arrival order, step-1 tokens in .peer
};

// Globally sorts by (timestamp, honeypot_id, input order), replaces step-1
// tokens by dense integer ids in first-occurrence order, sweeps dotted-quad
// substrings out of free-text fields, and writes the #hnl1-unified stream.
MergeStats merge_records(std::vector<MergeInput> inputs, std::ostream& unified_out);

// File-based variant: parses step-1 honeypot logs; malformed lines (including
// records whose peer field is not a 64-hex token) are skipped and counted.
MergeStats merge_log_files(const std::vector<std::string>& log_paths,
                           const std::string& unified_out_path);

// --- files sidecar merge ----------------------------------------------------

struct FileRow {
    std::string honeypot_id;
    honeypot::FileObservation::Source source = honeypot::FileObservation::Source::Advertised;
    proto::FileId file_id{};
    std::uint64_t size = 0;
    std::string name;
};

std::string format_file_row(const FileRow& row);
std::optional<FileRow> parse_file_row(std::string_view line);

// Deduplicates by (source, file_id), anonymizes names with the rare-word
// threshold, sweeps dotted quads, writes the #hnl1-files-unified table.
void merge_file_rows(std::vector<FileRow> rows, std::size_t threshold, std::ostream& out);

std::uint64_t merge_file_sidecars(const std::vector<std::string>& paths, std::size_t threshold,
                                  const std::string& out_path);

}  // namespace hnl::manager
