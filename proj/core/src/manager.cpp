// SPDX-License-Identifier: Apache-2.0
#include "hnl/manager.hpp"

#include "hnl/anonymize.hpp"
#include "hnl/bytes.hpp"
#include "hnl/diag.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hnl::manager {

std::vector<SupervisorAction> Supervisor::supervise(const std::vector<HoneypotStatus>& statuses,
                                                    std::int64_t now_ms) {
    const std::int64_t stale_after_ms =
        static_cast<std::int64_t>(cfg_.poll_interval_s * 3.0 * 1000.0);
    std::vector<SupervisorAction> actions;

    for (const auto& st : statuses) {
        if (quarantined_.count(st.honeypot_id) != 0) continue;
        if (now_ms - st.last_seen_ms <= stale_after_ms) continue;

        auto& times = history_[st.honeypot_id];
        while (!times.empty() && now_ms - times.front() > 3'600'000) times.pop_front();
        if (times.size() >= cfg_.max_restarts_per_hour) {
            quarantined_.insert(st.honeypot_id);
            diag::error("honeypot " + st.honeypot_id + " quarantined after " +
                        std::to_string(times.size()) + " restarts within an hour");
            actions.push_back({SupervisorAction::Kind::Quarantine, st.honeypot_id, {}});
            continue;
        }
        times.push_back(now_ms);
        std::uint32_t total = ++totals_[st.honeypot_id];

        SupervisorAction act;
        act.kind = SupervisorAction::Kind::Restart;
        act.honeypot_id = st.honeypot_id;
        if (!cfg_.server_pool.empty()) {
            // Rotate through the pool on consecutive restarts.
            act.server = cfg_.server_pool[total % cfg_.server_pool.size()];
        }
        actions.push_back(std::move(act));
    }
    return actions;
}

std::uint32_t Supervisor::restart_count(const std::string& honeypot_id) const {
    auto it = totals_.find(honeypot_id);
    return it == totals_.end() ? 0 : it->second;
}

namespace {

void sweep_record(LogRecord& rec) {
    if (anonymize::contains_dotted_quad(rec.peer_name))
        rec.peer_name = anonymize::sweep_dotted_quads(rec.peer_name);
    if (anonymize::contains_dotted_quad(rec.server_name))
        rec.server_name = anonymize::sweep_dotted_quads(rec.server_name);
    if (anonymize::contains_dotted_quad(rec.server_ip))
        rec.server_ip = anonymize::sweep_dotted_quads(rec.server_ip);
}

}  // namespace

MergeStats merge_records(std::vector<MergeInput> inputs, std::ostream& unified_out) {
    MergeStats stats;
    stats.sources = inputs.size();

    struct Entry {
        const LogRecord* rec;
        std::size_t source;
        std::size_t input_order;
    };
    std::vector<Entry> entries;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        auto& in = inputs[s];
        stats.records_in += in.records.size();
        for (std::size_t i = 0; i < in.records.size(); ++i) {
            entries.push_back({&in.records[i], s, i});
        }
    }
    // Sources have unique honeypot ids in any valid deployment; the source
    // index keeps the order total even if they do not.
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.rec->timestamp_ms != b.rec->timestamp_ms)
            return a.rec->timestamp_ms < b.rec->timestamp_ms;
        if (a.rec->honeypot_id != b.rec->honeypot_id) return a.rec->honeypot_id < b.rec->honeypot_id;
        if (a.input_order != b.input_order) return a.input_order < b.input_order;
        return a.source < b.source;
    });

    unified_out << kUnifiedLogMagic << '\n';
    anonymize::Renumberer renumber;
    for (const auto& e : entries) {
        LogRecord rec = *e.rec;
        rec.peer = std::to_string(renumber.id_for(rec.peer));
        sweep_record(rec);
        unified_out << format_log_line(rec) << '\n';
        ++stats.records_out;
    }
    stats.distinct_peers = renumber.size();
    return stats;
}

namespace {

// Reads one step-1 honeypot log; returns false if the header is missing.
bool read_honeypot_log(const std::string& path, MergeInput& out, std::uint64_t& malformed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string expect(kLogMagic);
    if (line.rfind(expect + "\t", 0) != 0) return false;
    out.honeypot_id = line.substr(expect.size() + 1);

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto rec = parse_log_line(line);
        // Step-1 logs must carry hash tokens; anything else (raw IPs included)
        // is treated as malformed and never reaches the unified output.
        if (!rec || !anonymize::is_ip_token(rec->peer)) {
            ++malformed;
            continue;
        }
        out.records.push_back(std::move(*rec));
    }
    return true;
}

}  // namespace

MergeStats merge_log_files(const std::vector<std::string>& log_paths,
                           const std::string& unified_out_path) {
    std::vector<MergeInput> inputs;
    std::uint64_t malformed = 0;
    std::size_t unreadable = 0;
    for (const auto& path : log_paths) {
        MergeInput input;
        if (!read_honeypot_log(path, input, malformed)) {
            diag::error("skipping unreadable honeypot log: " + path);
            ++unreadable;
            continue;
        }
        inputs.push_back(std::move(input));
    }

    std::ofstream out(unified_out_path, std::ios::binary);
    if (!out) {
        diag::error("cannot write unified log: " + unified_out_path);
        return {};
    }
    MergeStats stats = merge_records(std::move(inputs), out);
    stats.malformed = malformed;
    if (stats.malformed > 0) {
        diag::info("merge skipped " + std::to_string(stats.malformed) + " malformed lines");
    }
    (void)unreadable;
    return stats;
}

// --- files sidecar ------------------------------------------------------------

std::string format_file_row(const FileRow& row) {
    std::string out;
    out += row.honeypot_id;
    out += '\t';
    out += honeypot::to_string(row.source);
    out += '\t';
    out += to_hex(row.file_id);
    out += '\t';
    out += std::to_string(row.size);
    out += '\t';
    out += sanitize_field(row.name);
    return out;
}

std::optional<FileRow> parse_file_row(std::string_view line) {
    std::vector<std::string_view> f;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            f.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    if (f.size() != 5) return std::nullopt;
    FileRow row;
    row.honeypot_id = std::string(f[0]);
    if (f[1] == "advertised")
        row.source = honeypot::FileObservation::Source::Advertised;
    else if (f[1] == "shared")
        row.source = honeypot::FileObservation::Source::PeerShared;
    else
        return std::nullopt;
    if (!from_hex(f[2], row.file_id)) return std::nullopt;
    std::uint64_t size = 0;
    for (char c : f[3]) {
        if (c < '0' || c > '9') return std::nullopt;
        size = size * 10 + static_cast<std::uint64_t>(c - '0');
    }
    if (f[3].empty()) return std::nullopt;
    row.size = size;
    row.name = std::string(f[4]);
    return row;
}

void merge_file_rows(std::vector<FileRow> rows, std::size_t threshold, std::ostream& out) {
    // Canonical table independent of gather order: sort, then dedup by
    // (source, file_id) keeping the lowest honeypot_id sighting.
    std::sort(rows.begin(), rows.end(), [](const FileRow& a, const FileRow& b) {
        if (a.file_id != b.file_id) return a.file_id < b.file_id;
        if (a.source != b.source) return a.source < b.source;
        return a.honeypot_id < b.honeypot_id;
    });
    rows.erase(std::unique(rows.begin(), rows.end(),
                           [](const FileRow& a, const FileRow& b) {
                               return a.file_id == b.file_id && a.source == b.source;
                           }),
               rows.end());

    std::vector<std::string> names;
    names.reserve(rows.size());
    for (const auto& r : rows) names.push_back(r.name);
    auto anonymized = anonymize::anonymize_filenames(names, threshold);

    out << kUnifiedFilesMagic << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        FileRow row = rows[i];
        row.name = anonymize::sweep_dotted_quads(anonymized[i]);
        out << format_file_row(row) << '\n';
    }
}

std::uint64_t merge_file_sidecars(const std::vector<std::string>& paths, std::size_t threshold,
                                  const std::string& out_path) {
    std::vector<FileRow> rows;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) continue;
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (first) {
                first = false;
                if (line.rfind(kFilesMagic, 0) == 0) continue;
            }
            if (line.empty()) continue;
            auto row = parse_file_row(line);
            if (row) rows.push_back(std::move(*row));
        }
    }
    std::uint64_t n = rows.size();
    std::ofstream out(out_path, std::ios::binary);
    if (!out) return 0;
    merge_file_rows(std::move(rows), threshold, out);
    return n;
}

}  // namespace hnl::manager
