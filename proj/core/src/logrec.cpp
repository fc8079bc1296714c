// SPDX-License-Identifier: Apache-2.0
#include "hnl/logrec.hpp"

#include "hnl/anonymize.hpp"
#include "hnl/bytes.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace hnl {

const char* to_string(LoggedKind kind) {
    switch (kind) {
        case LoggedKind::Hello: return "HELLO";
        case LoggedKind::StartUpload: return "START-UPLOAD";
        case LoggedKind::RequestPart: return "REQUEST-PART";
    }
    return "?";
}

std::optional<LoggedKind> logged_kind_from(std::string_view s) {
    if (s == "HELLO") return LoggedKind::Hello;
    if (s == "START-UPLOAD") return LoggedKind::StartUpload;
    if (s == "REQUEST-PART") return LoggedKind::RequestPart;
    return std::nullopt;
}

std::string sanitize_field(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

std::string format_ranges(const std::vector<proto::PartRange>& ranges) {
    if (ranges.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(ranges[i].offset);
        out += ':';
        out += std::to_string(ranges[i].length);
    }
    return out;
}

std::string format_log_line(const LogRecord& rec) {
    std::string out;
    out.reserve(192);
    out += std::to_string(rec.timestamp_ms);
    out += '\t';
    out += rec.honeypot_id;
    out += '\t';
    out += to_string(rec.kind);
    out += '\t';
    out += rec.peer;
    out += '\t';
    out += std::to_string(rec.peer_port);
    out += '\t';
    out += rec.peer_name;
    out += '\t';
    out += rec.peer_user_id;
    out += '\t';
    out += std::to_string(rec.client_version);
    out += '\t';
    out += proto::to_string(rec.id_status);
    out += '\t';
    out += rec.server_name;
    out += '\t';
    out += rec.server_ip;
    out += '\t';
    out += std::to_string(rec.server_port);
    out += '\t';
    out += rec.file_id ? to_hex(*rec.file_id) : std::string("-");
    out += '\t';
    out += format_ranges(rec.ranges);
    return out;
}

namespace {

bool split_fields(std::string_view line, std::vector<std::string_view>& fields) {
    fields.clear();
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields.size() == 14;
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_ranges(std::string_view s, std::vector<proto::PartRange>& out) {
    out.clear();
    if (s == "-") return true;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string_view pair = s.substr(pos, comma == std::string_view::npos ? s.size() - pos
                                                                              : comma - pos);
        std::size_t colon = pair.find(':');
        if (colon == std::string_view::npos) return false;
        proto::PartRange r;
        if (!parse_uint(pair.substr(0, colon), r.offset)) return false;
        if (!parse_uint(pair.substr(colon + 1), r.length)) return false;
        out.push_back(r);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return !out.empty();
}

}  // namespace

std::optional<LogRecord> parse_log_line(std::string_view line) {
    std::vector<std::string_view> f;
    if (!split_fields(line, f)) return std::nullopt;

    LogRecord rec;
    std::uint64_t ts = 0;
    if (!parse_uint(f[0], ts)) return std::nullopt;
    rec.timestamp_ms = static_cast<std::int64_t>(ts);
    if (f[1].empty()) return std::nullopt;
    rec.honeypot_id = std::string(f[1]);
    auto kind = logged_kind_from(f[2]);
    if (!kind) return std::nullopt;
    rec.kind = *kind;
    if (f[3].empty()) return std::nullopt;
    rec.peer = std::string(f[3]);
    if (!parse_uint(f[4], rec.peer_port)) return std::nullopt;
    rec.peer_name = std::string(f[5]);
    rec.peer_user_id = std::string(f[6]);
    if (!parse_uint(f[7], rec.client_version)) return std::nullopt;
    if (f[8] == "high")
        rec.id_status = proto::IdStatus::High;
    else if (f[8] == "low")
        rec.id_status = proto::IdStatus::Low;
    else
        return std::nullopt;
    rec.server_name = std::string(f[9]);
    rec.server_ip = std::string(f[10]);
    if (!parse_uint(f[11], rec.server_port)) return std::nullopt;
    if (f[12] != "-") {
        proto::FileId id{};
        if (!from_hex(f[12], id)) return std::nullopt;
        rec.file_id = id;
    }
    if (!parse_ranges(f[13], rec.ranges)) return std::nullopt;
    return rec;
}

// --- sinks ------------------------------------------------------------------

FileLogSink::FileLogSink(const std::string& path, const std::string& honeypot_id,
                         std::string_view magic) {
    file_ = std::fopen(path.c_str(), "wb");
    if (file_ == nullptr) return;
    std::string header(magic);
    header += '\t';
    header += honeypot_id;
    header += '\n';
    if (std::fwrite(header.data(), 1, header.size(), file_) != header.size()) {
        std::fclose(file_);
        file_ = nullptr;
    }
}

FileLogSink::~FileLogSink() {
    if (file_ != nullptr) std::fclose(file_);
}

bool FileLogSink::append_line(const std::string& line) {
    if (file_ == nullptr) return false;
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size()) return false;
    return std::fputc('\n', file_) != EOF;
}

void FileLogSink::flush() {
    if (file_ != nullptr) std::fflush(file_);
}

RecordWriter::RecordWriter(std::shared_ptr<LogSink> sink, std::size_t buffer_cap)
    : sink_(std::move(sink)), cap_(buffer_cap) {}

void RecordWriter::append(const LogRecord& rec) {
    if (!anonymize::is_ip_token(rec.peer)) {
        throw std::invalid_argument("log record peer field is not a step-1 token");
    }
    offer(format_log_line(rec));
}

void RecordWriter::offer(std::string line) {
    if (pending_.empty() && sink_ && sink_->append_line(line)) {
        ++stats_.written;
        return;
    }
    pending_.push_back(std::move(line));
    if (pending_.size() > cap_) {
        pending_.pop_front();
        ++stats_.dropped;
    }
    stats_.buffered = pending_.size();
}

bool RecordWriter::flush() {
    while (!pending_.empty()) {
        if (!sink_ || !sink_->append_line(pending_.front())) {
            stats_.buffered = pending_.size();
            return false;
        }
        pending_.pop_front();
        ++stats_.written;
    }
    stats_.buffered = 0;
    return true;
}

}  // namespace hnl
