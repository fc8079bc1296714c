// SPDX-License-Identifier: Apache-2.0
// Query log records and the tab-separated on-disk format.
//
// Honeypot log file:
//   #hnl1<TAB><honeypot_id>
//   one record per line, 14 tab-separated fields:
//     timestamp_ms  honeypot_id  kind  peer  port  name  user_id  version
//     id_status  server_name  server_ip  server_port  file_id  ranges
//   kind is HELLO | START-UPLOAD | REQUEST-PART; id_status is high | low;
//   ranges is off:len pairs joined by ','; absent file_id/ranges are '-'.
//   Timestamps are decimal milliseconds since the Unix epoch, UTC.
//
// The unified (merged) log uses header #hnl1-unified and an integer peer id in
// the peer field instead of the 64-hex step-1 token.
#pragma once

#include "hnl/protocol.hpp"

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hnl {

inline constexpr std::string_view kLogMagic = "#hnl1";
inline constexpr std::string_view kUnifiedLogMagic = "#hnl1-unified";
inline constexpr std::string_view kFilesMagic = "#hnl1-files";
inline constexpr std::string_view kUnifiedFilesMagic = "#hnl1-files-unified";

enum class LoggedKind : std::uint8_t { Hello, StartUpload, RequestPart };

const char* to_string(LoggedKind kind);
std::optional<LoggedKind> logged_kind_from(std::string_view s);

struct LogRecord {
    std::int64_t timestamp_ms = 0;
    std::string honeypot_id;
    LoggedKind kind = LoggedKind::Hello;
    std::string peer;  // step-1 token (64 hex) or, in unified logs, a decimal integer id
    std::uint16_t peer_port = 0;
    std::string peer_name;
    std::string peer_user_id;  // 32 hex
    std::uint32_t client_version = 0;
    proto::IdStatus id_status = proto::IdStatus::Low;
    std::string server_name;
    std::string server_ip;
    std::uint16_t server_port = 0;
    std::optional<proto::FileId> file_id;
    std::vector<proto::PartRange> ranges;

    bool operator==(const LogRecord&) const = default;
};

std::string format_log_line(const LogRecord& rec);
std::optional<LogRecord> parse_log_line(std::string_view line);

std::string format_ranges(const std::vector<proto::PartRange>& ranges);

// Tabs and newlines inside free-text fields would break the format; they are
// replaced with spaces when records are built.
std::string sanitize_field(std::string_view s);

// --- sinks ----------------------------------------------------------------

class LogSink {
public:
    virtual ~LogSink() = default;
    virtual bool append_line(const std::string& line) = 0;
};

// Appends lines to a file, writing the #hnl1 header when the file is created.
class FileLogSink : public LogSink {
public:
    FileLogSink(const std::string& path, const std::string& honeypot_id,
                std::string_view magic = kLogMagic);
    ~FileLogSink() override;

    bool append_line(const std::string& line) override;
    bool ok() const { return file_ != nullptr; }
    void flush();

private:
    std::FILE* file_ = nullptr;
};

struct RecordWriterStats {
    std::uint64_t written = 0;
    std::uint64_t buffered = 0;
    std::uint64_t dropped = 0;
};

// append_log: validates the step-1 token, preserves arrival order, and rides
// out sink outages with a bounded buffer (oldest records dropped beyond the
// bound, drops counted).
class RecordWriter {
public:
    explicit RecordWriter(std::shared_ptr<LogSink> sink, std::size_t buffer_cap = 1 << 16);

    // Throws std::invalid_argument if rec.peer is not a step-1 token
    // (raw IPs must never reach persistence).
    void append(const LogRecord& rec);

    // Retries buffered lines; returns true when the buffer drained.
    bool flush();

    const RecordWriterStats& stats() const { return stats_; }

private:
    void offer(std::string line);

    std::shared_ptr<LogSink> sink_;
    std::size_t cap_;
    std::deque<std::string> pending_;
    RecordWriterStats stats_;
};

}  // namespace hnl
