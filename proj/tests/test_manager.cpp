// SPDX-License-Identifier: Apache-2.0
#include "hnl/manager.hpp"

#include "hnl/anonymize.hpp"
#include "hnl/plan.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace hnl;
using namespace hnl::manager;

namespace {

LogRecord rec_of(std::int64_t ts, const std::string& hp, std::uint32_t ip,
                 const anonymize::Salt& salt, LoggedKind kind = LoggedKind::Hello) {
    LogRecord rec;
    rec.timestamp_ms = ts;
    rec.honeypot_id = hp;
    rec.kind = kind;
    rec.peer = anonymize::hash_ip(ip, salt).hex();
    rec.peer_port = 4662;
    rec.peer_name = "p";
    rec.peer_user_id = std::string(32, '0');
    rec.client_version = 1;
    rec.id_status = proto::IdStatus::High;
    rec.server_name = "main";
    rec.server_ip = "10.1.2.3";
    rec.server_port = 4661;
    return rec;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("plan parsing: scenario round trip") {
    const char* text =
        "# test plan\n"
        "poll_interval=10\n"
        "gather_interval=60\n"
        "assignment=spread\n"
        "server=main@srv0:4661\n"
        "server=alt@srv1:4661\n"
        "filename_threshold=3\n"
        "\n"
        "[honeypot]\n"
        "id=hp-a\n"
        "strategy=random-content\n"
        "greedy=true\n"
        "greedy_window_h=24\n"
        "file=000102030405060708090a0b0c0d0e0f 1234 A Movie.avi\n"
        "\n"
        "[honeypot]\n"
        "id=hp-b\n"
        "strategy=no-content\n";
    auto res = plan::parse_plan_text(text);
    REQUIRE(res.plan.has_value());
    const auto& p = *res.plan;
    CHECK(p.poll_interval_s == 10);
    CHECK(p.honeypots.size() == 2);
    CHECK(p.honeypots[0].server.host == "srv0");
    CHECK(p.honeypots[1].server.host == "srv1");  // spread
    CHECK(p.honeypots[0].greedy);
    REQUIRE(p.advertisements.count("hp-a") == 1);
    const auto& f = p.advertisements.at("hp-a")[0];
    CHECK(f.size == 1234);
    CHECK(f.name == "A Movie.avi");

    // format -> parse -> same structure
    auto round = plan::parse_plan_text(plan::format_plan(p));
    REQUIRE(round.plan.has_value());
    CHECK(round.plan->honeypots.size() == 2);
    CHECK(round.plan->advertisements.at("hp-a")[0].name == "A Movie.avi");
}

TEST_CASE("plan validation failures") {
    plan::DeploymentPlan p;
    p.honeypots.push_back({"hp-a", {"m", "srv0", 4661}, honeypot::Strategy::NoContent, false, 24, 0});
    p.honeypots.push_back({"hp-a", {"m", "srv0", 4661}, honeypot::Strategy::NoContent, false, 24, 0});
    CHECK(plan::validate(p).find("duplicate") != std::string::npos);

    p.honeypots.pop_back();
    p.advertisements["ghost"].push_back({});
    CHECK(plan::validate(p).find("undeclared") != std::string::npos);

    auto res = plan::parse_plan_text("[honeypot]\nid=x\n");
    CHECK(!res.plan.has_value());  // no server anywhere

    res = plan::parse_plan_text("nonsense\n");
    CHECK(!res.plan.has_value());
}

TEST_CASE("supervisor: fresh statuses produce no actions") {
    Supervisor sup({30.0, 5, {}});
    std::vector<HoneypotStatus> sts = {{"hp-a", true, 1u << 25, proto::IdStatus::High, 1000, 0}};
    CHECK(sup.supervise(sts, 1500).empty());
    // Exactly at the threshold is still fresh.
    CHECK(sup.supervise(sts, 1000 + 90'000).empty());
}

TEST_CASE("supervisor: one stale honeypot, one restart with redirect rotation") {
    Supervisor sup({30.0, 5, {{"main", "srv0", 4661}, {"alt", "srv1", 4661}}});
    std::vector<HoneypotStatus> sts = {
        {"hp-a", true, 1u << 25, proto::IdStatus::High, 0, 0},
        {"hp-b", true, 1u << 25, proto::IdStatus::High, 200'000, 0},
    };
    auto actions = sup.supervise(sts, 200'001);
    REQUIRE(actions.size() == 1);
    CHECK(actions[0].kind == SupervisorAction::Kind::Restart);
    CHECK(actions[0].honeypot_id == "hp-a");
    CHECK(actions[0].server.host == "srv1");  // rotated off the primary
    CHECK(sup.restart_count("hp-a") == 1);
}

TEST_CASE("supervisor: six failures within the hour quarantine the honeypot") {
    Supervisor sup({30.0, 5, {}});
    std::vector<HoneypotStatus> sts = {{"hp-a", false, std::nullopt, proto::IdStatus::Low, 0, 0}};
    std::int64_t now = 100'000;
    for (int i = 0; i < 5; ++i) {
        auto actions = sup.supervise(sts, now);
        REQUIRE(actions.size() == 1);
        CHECK(actions[0].kind == SupervisorAction::Kind::Restart);
        now += 120'000;  // two minutes apart, all within one hour
    }
    auto actions = sup.supervise(sts, now);
    REQUIRE(actions.size() == 1);
    CHECK(actions[0].kind == SupervisorAction::Kind::Quarantine);
    CHECK(sup.quarantined("hp-a"));
    // Quarantined honeypots get no further actions.
    CHECK(sup.supervise(sts, now + 120'000).empty());
}

TEST_CASE("supervisor: slow failures never quarantine") {
    Supervisor sup({30.0, 5, {}});
    std::vector<HoneypotStatus> sts = {{"hp-a", false, std::nullopt, proto::IdStatus::Low, 0, 0}};
    std::int64_t now = 100'000;
    for (int i = 0; i < 20; ++i) {
        auto actions = sup.supervise(sts, now);
        REQUIRE(actions.size() == 1);
        CHECK(actions[0].kind == SupervisorAction::Kind::Restart);
        now += 1'800'000;  // every 30 minutes: at most 2-3 per rolling hour
    }
    CHECK(!sup.quarantined("hp-a"));
}

TEST_CASE("merge: disjoint times concatenate in time order") {
    auto salt = anonymize::salt_from_seed(1);
    std::vector<MergeInput> inputs(2);
    inputs[0].honeypot_id = "hp-a";
    inputs[0].records = {rec_of(100, "hp-a", 1, salt), rec_of(200, "hp-a", 2, salt)};
    inputs[1].honeypot_id = "hp-b";
    inputs[1].records = {rec_of(300, "hp-b", 3, salt), rec_of(400, "hp-b", 1, salt)};

    std::ostringstream out;
    auto stats = merge_records(std::move(inputs), out);
    CHECK(stats.records_in == 4);
    CHECK(stats.records_out == 4);
    CHECK(stats.distinct_peers == 3);

    auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "#hnl1-unified");
    CHECK(lines[1].rfind("100\t", 0) == 0);
    CHECK(lines[4].rfind("400\t", 0) == 0);
}

TEST_CASE("merge: same token in two logs gets one coherent id") {
    auto salt = anonymize::salt_from_seed(1);
    std::vector<MergeInput> inputs(2);
    inputs[0].honeypot_id = "hp-a";
    inputs[0].records = {rec_of(100, "hp-a", 42, salt)};
    inputs[1].honeypot_id = "hp-b";
    inputs[1].records = {rec_of(200, "hp-b", 42, salt)};

    std::ostringstream out;
    merge_records(std::move(inputs), out);
    auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 3);
    auto rec1 = parse_log_line(lines[1]);
    auto rec2 = parse_log_line(lines[2]);
    REQUIRE(rec1.has_value());
    REQUIRE(rec2.has_value());
    CHECK(rec1->peer == "0");
    CHECK(rec2->peer == "0");
}

TEST_CASE("merge: first-occurrence renumbering across the sorted stream") {
    auto salt = anonymize::salt_from_seed(1);
    // Tokens in merged time order: a, b, a, c -> 0, 1, 0, 2
    std::vector<MergeInput> inputs(1);
    inputs[0].honeypot_id = "hp-a";
    inputs[0].records = {rec_of(1, "hp-a", 0xA, salt), rec_of(2, "hp-a", 0xB, salt),
                         rec_of(3, "hp-a", 0xA, salt), rec_of(4, "hp-a", 0xC, salt)};
    std::ostringstream out;
    auto stats = merge_records(std::move(inputs), out);
    CHECK(stats.distinct_peers == 3);
    auto lines = lines_of(out.str());
    std::vector<std::string> ids;
    for (std::size_t i = 1; i < lines.size(); ++i) ids.push_back(parse_log_line(lines[i])->peer);
    CHECK(ids == std::vector<std::string>{"0", "1", "0", "2"});
}

TEST_CASE("merge: ties sort by honeypot id then input order") {
    auto salt = anonymize::salt_from_seed(1);
    std::vector<MergeInput> inputs(2);
    inputs[0].honeypot_id = "hp-b";
    inputs[0].records = {rec_of(100, "hp-b", 1, salt), rec_of(100, "hp-b", 2, salt)};
    inputs[1].honeypot_id = "hp-a";
    inputs[1].records = {rec_of(100, "hp-a", 3, salt)};

    std::ostringstream out;
    merge_records(std::move(inputs), out);
    auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 4);
    CHECK(parse_log_line(lines[1])->honeypot_id == "hp-a");
    CHECK(parse_log_line(lines[2])->honeypot_id == "hp-b");
    CHECK(parse_log_line(lines[3])->honeypot_id == "hp-b");
    // Input order within hp-b preserved.
    CHECK(parse_log_line(lines[2])->peer != parse_log_line(lines[3])->peer);
}

TEST_CASE("merge sweeps dotted quads out of free-text fields") {
    auto salt = anonymize::salt_from_seed(1);
    std::vector<MergeInput> inputs(1);
    inputs[0].honeypot_id = "hp-a";
    auto rec = rec_of(100, "hp-a", 1, salt);
    rec.peer_name = "peer at 1.2.3.4";
    rec.server_ip = "10.1.2.3";
    inputs[0].records = {rec};

    std::ostringstream out;
    merge_records(std::move(inputs), out);
    CHECK(!anonymize::contains_dotted_quad(out.str()));
    CHECK(out.str().find("ip4-0a010203") != std::string::npos);
}

TEST_CASE("merge from files: count oracle and malformed counting") {
    auto dir = test::scratch_dir("merge-files");
    auto salt = anonymize::salt_from_seed(3);

    std::uint64_t total = 0;
    std::vector<std::string> paths;
    for (int h = 0; h < 4; ++h) {
        std::string id = "hp-" + std::to_string(h);
        auto path = (dir / (id + ".log")).string();
        std::ofstream out(path, std::ios::binary);
        out << kLogMagic << "\t" << id << "\n";
        for (int i = 0; i < 25; ++i) {
            out << format_log_line(rec_of(1000 + i * 7 + h, id,
                                          static_cast<std::uint32_t>((i * 13 + h) % 17), salt))
                << "\n";
            ++total;
        }
        if (h == 2) out << "this line is garbage\n";
        paths.push_back(path);
    }

    auto unified = (dir / "unified.log").string();
    auto stats = merge_log_files(paths, unified);
    CHECK(stats.sources == 4);
    CHECK(stats.records_out == total);
    CHECK(stats.malformed == 1);

    // Count oracle: distinct ids equal brute-force distinct ip count.
    std::set<int> distinct_ips;
    for (int h = 0; h < 4; ++h)
        for (int i = 0; i < 25; ++i) distinct_ips.insert((i * 13 + h) % 17);
    CHECK(stats.distinct_peers == distinct_ips.size());

    // Unified ids are dense 0..k-1.
    std::ifstream in(unified);
    std::string line;
    std::getline(in, line);
    CHECK(line == "#hnl1-unified");
    std::set<std::uint64_t> ids;
    std::uint64_t n = 0;
    while (std::getline(in, line)) {
        auto rec = parse_log_line(line);
        REQUIRE(rec.has_value());
        ids.insert(std::stoull(rec->peer));
        ++n;
    }
    CHECK(n == total);
    CHECK(ids.size() == distinct_ips.size());
    CHECK(*ids.begin() == 0);
    CHECK(*ids.rbegin() == ids.size() - 1);
}

TEST_CASE("merge preserves the record multiset modulo peer rewriting") {
    auto salt = anonymize::salt_from_seed(17);
    std::mt19937_64 rng(17);
    std::vector<MergeInput> inputs(5);
    // Records with the peer field blanked and free text swept, the two
    // rewrites merge is allowed to make.
    std::multiset<std::string> before;
    auto blank_peer = [](LogRecord rec) {
        rec.peer = "?";
        rec.peer_name = anonymize::sweep_dotted_quads(rec.peer_name);
        rec.server_name = anonymize::sweep_dotted_quads(rec.server_name);
        rec.server_ip = anonymize::sweep_dotted_quads(rec.server_ip);
        return format_log_line(rec);
    };
    for (int h = 0; h < 5; ++h) {
        inputs[h].honeypot_id = "hp-" + std::to_string(h);
        for (int i = 0; i < 200; ++i) {
            auto rec = rec_of(static_cast<std::int64_t>(rng() % 50'000), inputs[h].honeypot_id,
                              static_cast<std::uint32_t>(rng() % 40), salt,
                              static_cast<LoggedKind>(rng() % 3));
            if (rec.kind != LoggedKind::Hello) rec.file_id = test::file_id_of(rng() % 6);
            if (rec.kind == LoggedKind::RequestPart) rec.ranges = {{rng() % 1000, 512}};
            before.insert(blank_peer(rec));
            inputs[h].records.push_back(std::move(rec));
        }
    }

    std::ostringstream out;
    merge_records(std::move(inputs), out);
    std::multiset<std::string> after;
    auto lines = lines_of(out.str());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto rec = parse_log_line(lines[i]);
        REQUIRE(rec.has_value());
        after.insert(blank_peer(*rec));
    }
    CHECK(before == after);
}

TEST_CASE("file sidecar rows: format, parse, merge with name anonymization") {
    std::vector<FileRow> rows;
    FileRow r1{"hp-a", honeypot::FileObservation::Source::Advertised, test::file_id_of(1), 100,
               "john holiday video"};
    FileRow r2{"hp-b", honeypot::FileObservation::Source::Advertised, test::file_id_of(1), 100,
               "john holiday video"};  // duplicate (source, file_id)
    FileRow r3{"hp-a", honeypot::FileObservation::Source::PeerShared, test::file_id_of(2), 50,
               "summer video"};
    rows = {r1, r2, r3};

    auto line = format_file_row(r1);
    auto parsed = parse_file_row(line);
    REQUIRE(parsed.has_value());
    CHECK(parsed->honeypot_id == "hp-a");
    CHECK(parsed->size == 100);
    CHECK(parsed->name == "john holiday video");

    std::ostringstream out;
    merge_file_rows(rows, 2, out);
    auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 3);  // header + 2 deduped rows
    CHECK(lines[0] == "#hnl1-files-unified");
    // Corpus after dedup: {"john holiday video", "summer video"} -> threshold 2
    CHECK(lines[1].find("w0 w1 video") != std::string::npos);
    CHECK(lines[2].find("w2 video") != std::string::npos);
}
