// SPDX-License-Identifier: Apache-2.0
#include "hnl/logrec.hpp"

#include "hnl/anonymize.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <fstream>
#include <memory>

using namespace hnl;

namespace {

LogRecord sample_record(std::int64_t ts = 1'225'497'600'000) {
    LogRecord rec;
    rec.timestamp_ms = ts;
    rec.honeypot_id = "hp-001";
    rec.kind = LoggedKind::RequestPart;
    rec.peer = anonymize::hash_ip(0x0A000001u, anonymize::salt_from_seed(1)).hex();
    rec.peer_port = 4662;
    rec.peer_name = "client one";
    rec.peer_user_id = "00112233445566778899aabbccddeeff";
    rec.client_version = 60;
    rec.id_status = proto::IdStatus::High;
    rec.server_name = "main";
    rec.server_ip = "srv0";
    rec.server_port = 4661;
    rec.file_id = test::file_id_of(3);
    rec.ranges = {{0, 180224}, {180224, 4096}};
    return rec;
}

struct FlakySink : LogSink {
    bool up = true;
    std::vector<std::string> lines;
    bool append_line(const std::string& line) override {
        if (!up) return false;
        lines.push_back(line);
        return true;
    }
};

}  // namespace

TEST_CASE("log line round-trips through format and parse") {
    auto rec = sample_record();
    auto line = format_log_line(rec);
    auto back = parse_log_line(line);
    REQUIRE(back.has_value());
    CHECK(*back == rec);

    // 14 tab-separated fields.
    CHECK(std::count(line.begin(), line.end(), '\t') == 13);
}

TEST_CASE("absent file and ranges render as dashes") {
    LogRecord rec = sample_record();
    rec.kind = LoggedKind::Hello;
    rec.file_id.reset();
    rec.ranges.clear();
    auto line = format_log_line(rec);
    CHECK(line.find("\t-\t-") != std::string::npos);
    auto back = parse_log_line(line);
    REQUIRE(back.has_value());
    CHECK(!back->file_id.has_value());
    CHECK(back->ranges.empty());
}

TEST_CASE("parse rejects mangled lines") {
    auto rec = sample_record();
    auto line = format_log_line(rec);
    CHECK(!parse_log_line("").has_value());
    CHECK(!parse_log_line("x").has_value());
    CHECK(!parse_log_line(line + "\textra").has_value());
    auto bad_kind = line;
    bad_kind.replace(bad_kind.find("REQUEST-PART"), 12, "REQUEST-XXXX");
    CHECK(!parse_log_line(bad_kind).has_value());
}

TEST_CASE("append_log: order preserved, header first") {
    auto dir = test::scratch_dir("logrec-order");
    auto path = (dir / "hp.log").string();
    {
        auto sink = std::make_shared<FileLogSink>(path, "hp-001");
        REQUIRE(sink->ok());
        RecordWriter writer(sink);
        for (int i = 0; i < 3; ++i) writer.append(sample_record(1000 + i));
        sink->flush();
        CHECK(writer.stats().written == 3);
    }
    std::ifstream in(path);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "#hnl1\thp-001");
    CHECK(lines[1].rfind("1000\t", 0) == 0);
    CHECK(lines[2].rfind("1001\t", 0) == 0);
    CHECK(lines[3].rfind("1002\t", 0) == 0);
}

TEST_CASE("append_log rejects a raw ip in the token field") {
    RecordWriter writer(std::make_shared<FlakySink>());
    auto rec = sample_record();
    rec.peer = "10.0.0.1";
    CHECK_THROWS_AS(writer.append(rec), std::invalid_argument);
    rec.peer = "not-a-token";
    CHECK_THROWS_AS(writer.append(rec), std::invalid_argument);
    // Uppercase hex is not the token format either.
    rec.peer = std::string(64, 'A');
    CHECK_THROWS_AS(writer.append(rec), std::invalid_argument);
}

TEST_CASE("append_log buffers through sink outages, drops oldest beyond bound") {
    auto sink = std::make_shared<FlakySink>();
    RecordWriter writer(sink, /*buffer_cap=*/4);

    writer.append(sample_record(1));
    CHECK(writer.stats().written == 1);

    sink->up = false;
    for (int i = 2; i <= 8; ++i) writer.append(sample_record(i));
    CHECK(writer.stats().dropped == 3);  // 7 offered, 4 kept
    CHECK(writer.stats().buffered == 4);

    sink->up = true;
    CHECK(writer.flush());
    CHECK(writer.stats().written == 5);  // 1 + the 4 surviving buffered
    REQUIRE(sink->lines.size() == 5);
    // Oldest three (ts 2,3,4) were dropped; survivors stay in order.
    CHECK(sink->lines[1].rfind("5\t", 0) == 0);
    CHECK(sink->lines[4].rfind("8\t", 0) == 0);
}

TEST_CASE("a million records: count preserved, none duplicated") {
    auto dir = test::scratch_dir("logrec-bulk");
    auto path = (dir / "bulk.log").string();
    const int kCount = 1'000'000;
    {
        auto sink = std::make_shared<FileLogSink>(path, "hp-bulk");
        REQUIRE(sink->ok());
        RecordWriter writer(sink);
        LogRecord rec = sample_record();
        rec.file_id.reset();
        rec.ranges.clear();
        for (int i = 0; i < kCount; ++i) {
            rec.timestamp_ms = i;  // unique per record
            writer.append(rec);
        }
        CHECK(writer.stats().written == kCount);
        CHECK(writer.stats().dropped == 0);
    }
    // Count oracle: line count and distinct-timestamp count both match.
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "#hnl1\thp-bulk");
    std::uint64_t count = 0;
    std::int64_t last_ts = -1;
    bool ordered = true;
    while (std::getline(in, line)) {
        auto tab = line.find('\t');
        std::int64_t ts = std::stoll(line.substr(0, tab));
        if (ts <= last_ts) ordered = false;  // strictly increasing => no dup
        last_ts = ts;
        ++count;
    }
    CHECK(count == kCount);
    CHECK(ordered);
}
