// SPDX-License-Identifier: Apache-2.0
#include "hnl/sim.hpp"

#include "hnl/analysis.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace hnl;
using namespace hnl::sim;

namespace {

SimConfig small_config(std::uint64_t seed = 1) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.duration_s = 6 * 3600.0;
    cfg.n_peers = 150;
    cfg.catalog_size = 20;
    cfg.n_honeypots = 6;
    cfg.n_advertised = 4;
    cfg.sessions_per_peer_per_day = 4.0;  // compressed activity for short runs
    cfg.startup_delay_mean_s = 120.0;
    cfg.timeout_no_answer_s = 20.0;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TraceRow {
    std::int64_t t;
    std::string event, peer, honeypot, file, detail;
};

std::vector<TraceRow> load_trace(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        TraceRow row;
        std::size_t pos = 0;
        std::string fields[6];
        for (int f = 0; f < 6; ++f) {
            auto comma = line.find(',', pos);
            if (comma == std::string::npos && f < 5) break;
            fields[f] = line.substr(pos, f == 5 ? std::string::npos : comma - pos);
            pos = comma + 1;
        }
        row.t = std::stoll(fields[0]);
        row.event = fields[1];
        row.peer = fields[2];
        row.honeypot = fields[3];
        row.file = fields[4];
        row.detail = fields[5];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TEST_CASE("request pacing: silence is the exact timeout, service varies") {
    std::mt19937_64 rng(3);
    const std::int64_t timeout = 30'000'000;
    for (int i = 0; i < 100; ++i) {
        CHECK(next_request_gap_us(false, timeout, 4.0, rng) == timeout);
    }
    std::vector<std::int64_t> gaps;
    for (int i = 0; i < 200; ++i) gaps.push_back(next_request_gap_us(true, timeout, 4.0, rng));
    double mean = 0;
    for (auto g : gaps) mean += static_cast<double>(g);
    mean /= static_cast<double>(gaps.size());
    double var = 0;
    for (auto g : gaps) var += (static_cast<double>(g) - mean) * (static_cast<double>(g) - mean);
    CHECK(var > 0);
    for (auto g : gaps) CHECK(g >= 200'000);  // floor
}

TEST_CASE("detection thresholds are geometric with the configured mean") {
    std::mt19937_64 rng(5);
    for (double target : {3.0, 10.0}) {
        double sum = 0;
        const int kTrials = 10'000;
        for (int i = 0; i < kTrials; ++i) sum += draw_detection_threshold(target, rng);
        double mean = sum / kTrials;
        CHECK(mean == doctest::Approx(target).epsilon(0.05));
    }
    CHECK(draw_detection_threshold(1.0, rng) == 1);
}

TEST_CASE("blacklist_update: evidence below the drawn threshold never lists") {
    std::mt19937_64 rng(7);
    Standing st;
    st.bad_threshold = 5;
    st.silent_threshold = 5;
    bool listed = false;
    for (int i = 0; i < 4; ++i) listed |= blacklist_update(st, Evidence::BadPart, 10, 3, rng);
    CHECK(!listed);
    CHECK(!st.listed);
    CHECK(blacklist_update(st, Evidence::BadPart, 10, 3, rng));
    CHECK(st.listed);
    // Once listed, further evidence is a no-op.
    CHECK(!blacklist_update(st, Evidence::Silence, 10, 3, rng));
}

TEST_CASE("blacklist asymmetry: random content survives longer in expectation") {
    std::mt19937_64 rng(9);
    const int kTrials = 10'000;
    auto expected_evidence = [&](Evidence ev) {
        std::uint64_t total = 0;
        for (int i = 0; i < kTrials; ++i) {
            Standing st;
            std::uint32_t n = 0;
            while (!blacklist_update(st, ev, 10.0, 3.0, rng)) ++n;
            total += n + 1;
        }
        return static_cast<double>(total) / kTrials;
    };
    double bad_mean = expected_evidence(Evidence::BadPart);
    double silent_mean = expected_evidence(Evidence::Silence);
    CHECK(bad_mean == doctest::Approx(10.0).epsilon(0.05));
    CHECK(silent_mean == doctest::Approx(3.0).epsilon(0.05));
    CHECK(bad_mean > silent_mean);
}

TEST_CASE("sim config parsing and validation") {
    auto res = parse_sim_config_text(
        "seed=42\nduration_days=2\nn_peers=100\ndiurnal_amplitude=0.4\nscenario=greedy\n");
    REQUIRE(res.config.has_value());
    CHECK(res.config->seed == 42);
    CHECK(res.config->duration_s == doctest::Approx(172800.0));
    CHECK(res.config->scenario == "greedy");

    CHECK(!parse_sim_config_text("diurnal_amplitude=1.5\n").config.has_value());
    CHECK(!parse_sim_config_text("detect_no_content=9\ndetect_random_content=4\n").config.has_value());
    CHECK(!parse_sim_config_text("mystery=1\n").config.has_value());
    CHECK(!parse_sim_config_text("seed\n").config.has_value());

    // format -> parse round trip preserves values.
    auto cfg = small_config(77);
    auto round = parse_sim_config_text(format_sim_config(cfg));
    REQUIRE(round.config.has_value());
    CHECK(round.config->seed == 77);
    CHECK(round.config->n_peers == cfg.n_peers);
    CHECK(round.config->duration_s == doctest::Approx(cfg.duration_s));
}

TEST_CASE("catalog and scenario plans are deterministic and well-formed") {
    auto cfg = small_config(3);
    auto catalog = make_catalog(cfg);
    REQUIRE(catalog.size() == cfg.catalog_size);
    double total = 0;
    std::set<proto::FileId> ids;
    for (const auto& entry : catalog) {
        CHECK(entry.meta.size > 0);
        CHECK(!entry.meta.name.empty());
        CHECK(ids.insert(entry.meta.file_id).second);
        total += entry.weight;
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(catalog[0].weight > catalog[10].weight);  // popularity is skewed

    auto catalog2 = make_catalog(cfg);
    CHECK(catalog2[5].meta == catalog[5].meta);

    auto dp = make_scenario_plan(cfg, catalog);
    CHECK(plan::validate(dp).empty());
    REQUIRE(dp.honeypots.size() == 6);
    int nc = 0, rc = 0;
    for (const auto& hp : dp.honeypots)
        (hp.strategy == honeypot::Strategy::NoContent ? nc : rc)++;
    CHECK(nc == 3);
    CHECK(rc == 3);
    CHECK(dp.advertisements.at("hp-001").size() == 4);
    // All honeypots advertise the same files.
    CHECK(dp.advertisements.at("hp-001") == dp.advertisements.at("hp-006"));

    cfg.scenario = "greedy";
    auto gp = make_scenario_plan(cfg, catalog);
    REQUIRE(gp.honeypots.size() == 1);
    CHECK(gp.honeypots[0].greedy);
    CHECK(gp.honeypots[0].strategy == honeypot::Strategy::NoContent);
}

TEST_CASE("duration zero produces an empty dataset") {
    auto cfg = small_config();
    cfg.duration_s = 0;
    auto catalog = make_catalog(cfg);
    auto dp = make_scenario_plan(cfg, catalog);
    auto dir = test::scratch_dir("sim-zero");
    auto result = run_simulation(cfg, dp, dir.string());
    CHECK(result.merge.records_out == 0);
    CHECK(slurp(result.unified_path) == "#hnl1-unified\n");
}

TEST_CASE("identical seed and config give byte-identical outputs") {
    auto cfg = small_config(11);
    cfg.duration_s = 3 * 3600.0;
    auto catalog = make_catalog(cfg);
    auto dp = make_scenario_plan(cfg, catalog);

    auto dir1 = test::scratch_dir("sim-det-1");
    auto dir2 = test::scratch_dir("sim-det-2");
    auto r1 = run_simulation(cfg, dp, dir1.string());
    auto r2 = run_simulation(cfg, dp, dir2.string());

    CHECK(r1.merge.records_out > 0);  // a run with nothing in it proves nothing
    CHECK(slurp(r1.unified_path) == slurp(r2.unified_path));
    CHECK(slurp(r1.trace_path) == slurp(r2.trace_path));
    CHECK(slurp(r1.files_path) == slurp(r2.files_path));

    // A different seed diverges.
    auto cfg3 = cfg;
    cfg3.seed = 12;
    auto dir3 = test::scratch_dir("sim-det-3");
    auto r3 = run_simulation(cfg3, dp, dir3.string());
    CHECK(slurp(r1.unified_path) != slurp(r3.unified_path));
}

TEST_CASE("fault injection: a honeypot with an unknown server fails, others connect") {
    auto cfg = small_config(13);
    cfg.duration_s = 600;
    auto catalog = make_catalog(cfg);
    auto dp = make_scenario_plan(cfg, catalog);
    dp.honeypots[2].server = {"ghost", "nowhere", 4661};

    auto dir = test::scratch_dir("sim-fault");
    auto result = run_simulation(cfg, dp, dir.string());
    CHECK(result.honeypots_connected == 5);
    CHECK(result.honeypots_failed == 1);

    auto status = slurp(result.status_path);
    CHECK(status.find("hp-003\t0\t-\t-") != std::string::npos);
    CHECK(status.find("hp-001\t1\t") != std::string::npos);
}

TEST_CASE("peers with no interests stay idle") {
    auto cfg = small_config(17);
    cfg.interest_mean = 0.0;
    cfg.duration_s = 3600;
    auto catalog = make_catalog(cfg);
    auto dp = make_scenario_plan(cfg, catalog);
    auto dir = test::scratch_dir("sim-idle");
    auto result = run_simulation(cfg, dp, dir.string());
    CHECK(result.merge.records_out == 0);
    // Arrivals happen, but every one is idle.
    bool has_idle = false;
    for (const auto& row : load_trace(result.trace_path)) {
        CHECK(row.event != "hello");
        if (row.event == "arrival" && row.detail == "idle") has_idle = true;
    }
    CHECK(has_idle);
}

TEST_CASE("trace and log agree: conservation and blacklist silence") {
    auto cfg = small_config(19);
    cfg.duration_s = 12 * 3600.0;
    cfg.detect_no_content = 2.0;
    cfg.detect_random_content = 4.0;
    auto catalog = make_catalog(cfg);
    auto dp = make_scenario_plan(cfg, catalog);
    auto dir = test::scratch_dir("sim-conserve");
    auto result = run_simulation(cfg, dp, dir.string());
    REQUIRE(result.merge.records_out > 0);

    auto trace = load_trace(result.trace_path);
    std::uint64_t trace_requests = 0;
    std::map<std::pair<std::string, std::string>, std::int64_t> blacklist_at;
    for (const auto& row : trace) {
        if (row.event == "request_part") ++trace_requests;
        if (row.event == "blacklist") blacklist_at[{row.peer, row.honeypot}] = row.t;
    }

    // Every REQUEST-PART in the unified log has exactly one peer-side event.
    auto load = analysis::load_unified_log(result.unified_path);
    REQUIRE(load.log.has_value());
    std::uint64_t logged_requests = 0;
    for (const auto& rec : load.log->records)
        if (rec.kind == LoggedKind::RequestPart) ++logged_requests;
    CHECK(logged_requests == trace_requests);

    // A blacklisted honeypot receives nothing further from that peer.
    CHECK(!blacklist_at.empty());
    for (const auto& row : trace) {
        if (row.event != "hello" && row.event != "request_part" && row.event != "start_upload")
            continue;
        auto it = blacklist_at.find({row.peer, row.honeypot});
        if (it != blacklist_at.end()) CHECK(row.t <= it->second);
    }
}

TEST_CASE("greedy accretion grows the shared list from peer shares") {
    auto cfg = small_config(23);
    cfg.scenario = "greedy";
    cfg.duration_s = 12 * 3600.0;
    cfg.catalog_size = 200;
    cfg.n_peers = 250;
    cfg.shares_mean = 6.0;
    auto catalog = make_catalog(cfg);
    auto dp = make_scenario_plan(cfg, catalog);
    auto dir = test::scratch_dir("sim-greedy");
    auto result = run_simulation(cfg, dp, dir.string());

    // The advertised set in files.tsv grew well beyond the 3 seed files.
    auto table = analysis::load_file_table(result.files_path);
    CHECK(table.advertised.size() > 20);
    CHECK(table.shared.size() > 20);
}

TEST_CASE("greedy accretion reaches thousands in day one, then freezes") {
    SimConfig cfg;
    cfg.seed = 11;
    cfg.scenario = "greedy";
    cfg.duration_s = 86'400.0;
    cfg.n_peers = 4000;
    cfg.catalog_size = 4000;
    cfg.shares_mean = 12.0;
    cfg.sessions_per_peer_per_day = 2.5;
    auto catalog = make_catalog(cfg);
    auto dp = make_scenario_plan(cfg, catalog);

    auto dir1 = test::scratch_dir("sim-greedy-day1");
    auto day1 = run_simulation(cfg, dp, dir1.string());
    auto table1 = analysis::load_file_table(day1.files_path);
    CHECK(table1.advertised.size() > 1500);

    // Half a day past the deadline, the advertised set is unchanged: the
    // accretion window closed at 24 h.
    auto cfg2 = cfg;
    cfg2.duration_s = 1.5 * 86'400.0;
    auto dir2 = test::scratch_dir("sim-greedy-frozen");
    auto frozen = run_simulation(cfg2, dp, dir2.string());
    auto table2 = analysis::load_file_table(frozen.files_path);
    CHECK(table2.advertised.size() == table1.advertised.size());
    // Peers kept sharing lists after the freeze; observations continue.
    CHECK(table2.shared.size() >= table1.shared.size());
    CHECK(frozen.merge.records_out > day1.merge.records_out);
}

TEST_CASE("strategy split shows in the unified log via the plan groups") {
    auto cfg = small_config(29);
    cfg.duration_s = 12 * 3600.0;
    auto catalog = make_catalog(cfg);
    auto dp = make_scenario_plan(cfg, catalog);
    auto dir = test::scratch_dir("sim-groups");
    auto result = run_simulation(cfg, dp, dir.string());

    auto load = analysis::load_unified_log(result.unified_path);
    REQUIRE(load.log.has_value());
    auto groups = plan::strategy_groups(dp);
    auto series = analysis::per_strategy_series(*load.log, groups, LoggedKind::RequestPart,
                                                analysis::SeriesMode::MessageCount,
                                                analysis::kMsPerHour);
    REQUIRE(series.size() == 2);
    REQUIRE(!series[0].avg.empty());
    // Both groups saw traffic in a run this size.
    CHECK(series[0].avg.back() > 0);
    CHECK(series[1].avg.back() > 0);
}
