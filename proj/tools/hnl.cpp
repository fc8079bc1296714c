// SPDX-License-Identifier: Apache-2.0
// hnl: honeypot measurement platform CLI.
//
//   hnl run-sim       simulate a deployment and produce the unified dataset
//   hnl run-manager   launch + supervise live honeypots, gather and unify
//   hnl run-honeypot  run a single live honeypot
//   hnl anonymize     merge step-1 honeypot logs into a unified dataset
//   hnl analyze       compute measurement reports from a unified log
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.
#include "hnl/analysis.hpp"
#include "hnl/anonymize.hpp"
#include "hnl/bytes.hpp"
#include "hnl/diag.hpp"
#include "hnl/manager.hpp"
#include "hnl/plan.hpp"
#include "hnl/runtime.hpp"
#include "hnl/sim.hpp"
#include "hnl/version.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted.store(true); }

void write_manifest(const std::string& out_dir, json manifest) {
    manifest["version"] = hnl::kVersion;
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

const std::vector<std::string> kSubcommands = {"run-sim", "run-manager", "run-honeypot",
                                               "anonymize", "analyze"};

int suggest_unknown(const std::string& given) {
    std::string best;
    std::size_t best_dist = 1000;
    for (const auto& name : kSubcommands) {
        std::size_t d = levenshtein(given, name);
        if (d < best_dist) {
            best_dist = d;
            best = name;
        }
    }
    std::cerr << "hnl: unknown subcommand '" << given << "'";
    if (best_dist <= 4) std::cerr << " (did you mean '" << best << "'?)";
    std::cerr << "\nRun 'hnl --help' for usage.\n";
    return 1;
}

// --- run-sim -------------------------------------------------------------------

struct RunSimArgs {
    std::string config;
    std::string plan;
    std::string out;
    std::int64_t seed = -1;
};

int cmd_run_sim(const RunSimArgs& args) {
    auto cfg_res = hnl::sim::load_sim_config(args.config);
    if (!cfg_res.config) {
        std::cerr << "hnl run-sim: " << cfg_res.error << "\n";
        return 2;
    }
    auto cfg = *cfg_res.config;
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);

    hnl::plan::DeploymentPlan dplan;
    auto catalog = hnl::sim::make_catalog(cfg);
    if (!args.plan.empty()) {
        auto plan_res = hnl::plan::load_plan(args.plan);
        if (!plan_res.plan) {
            std::cerr << "hnl run-sim: " << plan_res.error << "\n";
            return 2;
        }
        dplan = *plan_res.plan;
    } else if (cfg.scenario != "custom") {
        dplan = hnl::sim::make_scenario_plan(cfg, catalog);
    } else {
        std::cerr << "hnl run-sim: scenario=custom requires --plan\n";
        return 2;
    }

    json manifest;
    manifest["subcommand"] = "run-sim";
    manifest["config"] = args.config;
    manifest["plan"] = args.plan;
    manifest["out"] = args.out;
    manifest["seed"] = cfg.seed;
    write_manifest(args.out, manifest);

    auto result = hnl::sim::run_simulation(cfg, dplan, args.out);
    std::cout << "simulated " << result.events << " events, " << result.sessions << " sessions\n"
              << "honeypots connected " << result.honeypots_connected << ", failed "
              << result.honeypots_failed << "\n"
              << "records " << result.merge.records_out << " (" << result.merge.distinct_peers
              << " distinct peers), malformed " << result.merge.malformed << "\n"
              << "unified log: " << result.unified_path << "\n"
              << "event trace: " << result.trace_path << "\n";
    return 0;
}

// --- run-manager ----------------------------------------------------------------

struct RunManagerArgs {
    std::string plan;
    std::string out;
    double duration_s = 0.0;
    std::int64_t seed = -1;
};

int cmd_run_manager(const RunManagerArgs& args) {
    auto plan_res = hnl::plan::load_plan(args.plan);
    if (!plan_res.plan) {
        std::cerr << "hnl run-manager: " << plan_res.error << "\n";
        return 2;
    }

    json manifest;
    manifest["subcommand"] = "run-manager";
    manifest["plan"] = args.plan;
    manifest["out"] = args.out;
    manifest["seed"] = args.seed;
    manifest["duration_s"] = args.duration_s;
    write_manifest(args.out, manifest);

    hnl::runtime::LiveManagerOptions opts;
    opts.plan = *plan_res.plan;
    opts.out_dir = args.out;
    opts.duration_s = args.duration_s;
    opts.seed = args.seed >= 0 ? static_cast<std::uint64_t>(args.seed) : 0;

    hnl::runtime::LiveManager mgr(opts);
    std::thread watcher([&mgr] {
        while (!g_interrupted.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
        mgr.stop();
    });
    auto result = mgr.run();
    g_interrupted.store(true);
    watcher.join();

    std::cout << "launched " << result.launch.started << ", failed " << result.launch.failed
              << "\n"
              << "records " << result.merge.records_out << " (" << result.merge.distinct_peers
              << " distinct peers), malformed " << result.merge.malformed << "\n"
              << "unified log: " << result.unified_path << "\n";
    return 0;
}

// --- run-honeypot ---------------------------------------------------------------

struct RunHoneypotArgs {
    std::string id = "hp-001";
    std::string server;
    std::string strategy = "no-content";
    std::string out;
    std::vector<std::string> files;
    std::uint16_t listen = 0;
    bool control = false;
    std::uint16_t control_port = 0;
    bool greedy = false;
    double greedy_window_h = 24.0;
    double duration_s = 0.0;
    std::int64_t seed = -1;
};

int cmd_run_honeypot(const RunHoneypotArgs& args) {
    auto server = hnl::plan::parse_server_spec(args.server);
    if (!server) {
        std::cerr << "hnl run-honeypot: bad --server (want [name@]host:port)\n";
        return 2;
    }
    auto strategy = hnl::honeypot::strategy_from(args.strategy);
    if (!strategy) {
        std::cerr << "hnl run-honeypot: strategy must be no-content or random-content\n";
        return 2;
    }

    hnl::runtime::LiveHoneypotOptions opts;
    opts.engine.honeypot_id = args.id;
    opts.engine.server = *server;
    opts.engine.strategy = *strategy;
    opts.engine.greedy.enabled = args.greedy;
    opts.engine.greedy.accretion_deadline_ms =
        hnl::runtime::wall_ms() + static_cast<std::int64_t>(args.greedy_window_h * 3.6e6);
    opts.engine.salt = args.seed >= 0
                           ? hnl::anonymize::salt_from_seed(static_cast<std::uint64_t>(args.seed))
                           : hnl::anonymize::random_salt();
    opts.engine.content_seed = args.seed >= 0 ? static_cast<std::uint64_t>(args.seed) : 1;
    opts.listen_port = args.listen;
    opts.control = args.control || args.control_port != 0;
    opts.control_port = args.control_port;
    opts.out_dir = args.out;

    for (const auto& spec : args.files) {
        // same shape as the plan's file= lines: <32 hex> <size> <name...>
        auto sp1 = spec.find(' ');
        auto sp2 = spec.find(' ', sp1 == std::string::npos ? std::string::npos : sp1 + 1);
        hnl::proto::FileMeta meta;
        bool ok = sp1 != std::string::npos && sp2 != std::string::npos &&
                  hnl::from_hex(std::string_view(spec).substr(0, sp1), meta.file_id);
        if (ok) {
            try {
                meta.size = std::stoull(spec.substr(sp1 + 1, sp2 - sp1 - 1));
            } catch (...) {
                ok = false;
            }
            meta.name = spec.substr(sp2 + 1);
            ok = ok && meta.size > 0 && !meta.name.empty();
        }
        if (!ok) {
            std::cerr << "hnl run-honeypot: bad --file (want '<32 hex> <size> <name>')\n";
            return 2;
        }
        opts.advertise.push_back(std::move(meta));
    }

    json manifest;
    manifest["subcommand"] = "run-honeypot";
    manifest["id"] = args.id;
    manifest["server"] = args.server;
    manifest["strategy"] = args.strategy;
    manifest["out"] = args.out;
    manifest["seed"] = args.seed;
    write_manifest(args.out, manifest);

    hnl::runtime::LiveHoneypot hp(opts);
    if (!hp.start()) {
        std::cerr << "hnl run-honeypot: failed to start (listener or log files)\n";
        return 2;
    }
    std::cout << "honeypot " << args.id << " listening on port " << hp.peer_port();
    if (opts.control) std::cout << ", control on port " << hp.control_port();
    std::cout << "\n";

    auto start = std::chrono::steady_clock::now();
    bool was_connected = false;
    while (!g_interrupted.load() && !hp.stop_requested()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        auto st = hp.status();
        if (st.connected != was_connected) {
            was_connected = st.connected;
            if (st.connected) {
                std::cout << "connected to " << server->host << ":" << server->port
                          << " with client id " << *st.client_id << " ("
                          << hnl::proto::to_string(st.id_status) << ")\n";
            } else {
                std::cout << "disconnected from server\n";
            }
        }
        if (args.duration_s > 0 &&
            std::chrono::steady_clock::now() - start >
                std::chrono::milliseconds(static_cast<int>(args.duration_s * 1000))) {
            break;
        }
    }
    hp.stop();
    auto rep = hp.control_status();
    std::cout << "logged " << rep.records << " records (" << rep.dropped << " dropped)\n"
              << "log: " << hp.log_path() << "\n";
    return 0;
}

// --- anonymize ------------------------------------------------------------------

struct AnonymizeArgs {
    std::vector<std::string> logs;
    std::string out;
    std::size_t threshold = 5;
};

int cmd_anonymize(const AnonymizeArgs& args) {
    json manifest;
    manifest["subcommand"] = "anonymize";
    manifest["logs"] = args.logs;
    manifest["out"] = args.out;
    manifest["threshold"] = args.threshold;
    write_manifest(args.out, manifest);

    auto unified = (fs::path(args.out) / "unified.log").string();
    auto stats = hnl::manager::merge_log_files(args.logs, unified);

    // Sidecars ride along when present: x.log -> x.files
    std::vector<std::string> sidecars;
    for (const auto& log : args.logs) {
        fs::path p(log);
        p.replace_extension(".files");
        if (fs::exists(p)) sidecars.push_back(p.string());
    }
    auto files_out = (fs::path(args.out) / "files.tsv").string();
    hnl::manager::merge_file_sidecars(sidecars, args.threshold, files_out);

    std::cout << "sources " << stats.sources << ", records " << stats.records_out << " ("
              << stats.distinct_peers << " distinct peers), malformed " << stats.malformed << "\n"
              << "unified log: " << unified << "\n";
    return 0;
}

// --- analyze --------------------------------------------------------------------

struct AnalyzeArgs {
    std::string log;
    std::string report = "summary";
    std::string out;
    std::string plan;
    double bucket_s = 86'400.0;
    std::uint64_t trials = 100;
    std::int64_t seed = 0;
};

void emit_series(const std::vector<hnl::analysis::Series>& series, const AnalyzeArgs& args) {
    if (args.out.empty()) {
        for (const auto& s : series) {
            if (series.size() > 1) std::cout << "# " << s.label << "\n";
            hnl::analysis::write_series_csv(std::cout, s);
        }
        return;
    }
    fs::path base(args.out);
    for (const auto& s : series) {
        fs::path path = base;
        if (series.size() > 1) {
            path = base.parent_path() / (base.stem().string() + "." + s.label +
                                         base.extension().string());
        }
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        hnl::analysis::write_series_csv(out, s);
        std::cout << path.string() << "\n";
    }
}

int cmd_analyze(const AnalyzeArgs& args) {
    auto load = hnl::analysis::load_unified_log(args.log);
    if (!load.log) {
        std::cerr << "hnl analyze: " << load.error << "\n";
        return 2;
    }
    const auto& log = *load.log;

    if (!args.out.empty()) {
        // Reproducibility record beside the CSV, named to avoid clobbering a
        // dataset's own manifest.json.
        json manifest;
        manifest["subcommand"] = "analyze";
        manifest["log"] = args.log;
        manifest["report"] = args.report;
        manifest["plan"] = args.plan;
        manifest["out"] = args.out;
        manifest["bucket_s"] = args.bucket_s;
        manifest["trials"] = args.trials;
        manifest["seed"] = args.seed;
        manifest["version"] = hnl::kVersion;
        fs::path path(args.out + ".manifest.json");
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream mout(path, std::ios::binary);
        mout << manifest.dump(2) << "\n";
    }

    hnl::analysis::StrategyGroups groups;
    bool have_plan = false;
    if (!args.plan.empty()) {
        auto plan_res = hnl::plan::load_plan(args.plan);
        if (!plan_res.plan) {
            std::cerr << "hnl analyze: " << plan_res.error << "\n";
            return 2;
        }
        groups = hnl::plan::strategy_groups(*plan_res.plan);
        have_plan = true;
    }
    auto need_plan = [&]() -> bool {
        if (!have_plan) std::cerr << "hnl analyze: report '" << args.report << "' needs --plan\n";
        return have_plan;
    };

    const std::int64_t bucket_ms = static_cast<std::int64_t>(args.bucket_s * 1000.0);
    const auto seed = static_cast<std::uint64_t>(args.seed);
    using hnl::analysis::SeriesMode;
    using hnl::LoggedKind;

    auto single = [&](hnl::analysis::Series s) { emit_series({std::move(s)}, args); };

    if (args.report == "summary") {
        auto files_tsv = (fs::path(args.log).parent_path() / "files.tsv").string();
        auto table = hnl::analysis::load_file_table(files_tsv);
        auto summary = hnl::analysis::summary_table(log, table);
        if (args.out.empty()) {
            hnl::analysis::write_summary_csv(std::cout, summary);
        } else {
            fs::path path(args.out);
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            std::ofstream out(path, std::ios::binary);
            hnl::analysis::write_summary_csv(out, summary);
            std::cout << path.string() << "\n";
        }
        return 0;
    }
    if (args.report == "peers-cumulative") {
        single(hnl::analysis::distinct_peers_over_time(log, bucket_ms));
        return 0;
    }
    if (args.report == "peers-per-day") {
        single(hnl::analysis::new_peers_per_day(log));
        return 0;
    }
    if (args.report == "hourly-hello" || args.report == "hourly-startupload" ||
        args.report == "hourly-requestpart") {
        LoggedKind kind = args.report == "hourly-hello"
                              ? LoggedKind::Hello
                              : (args.report == "hourly-startupload" ? LoggedKind::StartUpload
                                                                     : LoggedKind::RequestPart);
        single(hnl::analysis::hourly_message_counts(log, kind));
        return 0;
    }
    if (args.report == "per-strategy-hello" || args.report == "per-strategy-startupload" ||
        args.report == "per-strategy-requestpart") {
        if (!need_plan()) return 1;
        LoggedKind kind;
        SeriesMode mode;
        if (args.report == "per-strategy-hello") {
            kind = LoggedKind::Hello;
            mode = SeriesMode::DistinctPeers;
        } else if (args.report == "per-strategy-startupload") {
            kind = LoggedKind::StartUpload;
            mode = SeriesMode::DistinctPeers;
        } else {
            kind = LoggedKind::RequestPart;
            mode = SeriesMode::MessageCount;
        }
        emit_series(hnl::analysis::per_strategy_series(log, groups, kind, mode, bucket_ms), args);
        return 0;
    }
    if (args.report == "top-peer-hello" || args.report == "top-peer-startupload" ||
        args.report == "top-peer-requestpart") {
        if (!need_plan()) return 1;
        LoggedKind kind = args.report == "top-peer-hello"
                              ? LoggedKind::Hello
                              : (args.report == "top-peer-startupload" ? LoggedKind::StartUpload
                                                                       : LoggedKind::RequestPart);
        auto peer = hnl::analysis::top_peer(log);
        std::cout << "# top peer: " << peer << "\n";
        emit_series(hnl::analysis::single_peer_timeline(log, groups, peer, kind, bucket_ms), args);
        return 0;
    }
    if (args.report == "honeypot-subsets") {
        single(hnl::analysis::honeypot_subset_curve(log, args.trials, seed));
        return 0;
    }
    if (args.report == "file-subsets-random" || args.report == "file-subsets-popular") {
        std::vector<hnl::proto::FileId> file_set;
        if (args.report == "file-subsets-popular") {
            file_set = hnl::analysis::top_files_by_peers(log, 100);
        } else {
            auto all = hnl::analysis::queried_files(log);
            if (all.size() <= 100) {
                file_set = all;
            } else {
                std::mt19937_64 rng(seed);
                for (std::size_t i = 0; i < 100; ++i) {
                    std::size_t j = i + static_cast<std::size_t>(rng() % (all.size() - i));
                    std::swap(all[i], all[j]);
                    file_set.push_back(all[i]);
                }
            }
        }
        single(hnl::analysis::file_subset_curve(log, file_set, args.trials, seed));
        return 0;
    }
    if (args.report == "top-files") {
        auto top = hnl::analysis::top_files_by_peers(log, 100);
        std::map<hnl::proto::FileId, std::set<std::uint64_t>> peers_by_file;
        for (const auto& rec : log.records)
            if (rec.file_id) peers_by_file[*rec.file_id].insert(rec.peer);
        std::ostream* out = &std::cout;
        std::ofstream file_out;
        if (!args.out.empty()) {
            fs::path path(args.out);
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            file_out.open(path, std::ios::binary);
            out = &file_out;
            std::cout << path.string() << "\n";
        }
        *out << "file_id,distinct_peers\n";
        for (const auto& id : top)
            *out << hnl::to_hex(id) << ',' << peers_by_file[id].size() << '\n';
        return 0;
    }

    std::cerr << "hnl analyze: unknown report '" << args.report << "'\n"
              << "reports: summary peers-cumulative peers-per-day hourly-{hello,startupload,"
                 "requestpart} per-strategy-{hello,startupload,requestpart} "
                 "top-peer-{hello,startupload,requestpart} honeypot-subsets "
                 "file-subsets-{random,popular} top-files\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    CLI::App app{"hnl: distributed honeypot measurement platform for eDonkey-style networks"};
    app.set_version_flag("--version", std::string("hnl ") + hnl::kVersion);
    app.require_subcommand(0, 1);

    RunSimArgs sim_args;
    auto* sim_cmd = app.add_subcommand("run-sim", "Simulate a deployment at desk scale");
    sim_cmd->add_option("--config", sim_args.config, "Simulation config file")->required();
    sim_cmd->add_option("--plan", sim_args.plan, "Deployment plan (defaults to the scenario)");
    sim_cmd->add_option("--out", sim_args.out, "Output directory")->required();
    sim_cmd->add_option("--seed", sim_args.seed, "Override the config seed");

    RunManagerArgs mgr_args;
    auto* mgr_cmd = app.add_subcommand("run-manager", "Run live honeypots under a manager");
    mgr_cmd->add_option("--plan", mgr_args.plan, "Deployment plan")->required();
    mgr_cmd->add_option("--out", mgr_args.out, "Output directory")->required();
    mgr_cmd->add_option("--duration", mgr_args.duration_s, "Stop after this many seconds");
    mgr_cmd->add_option("--seed", mgr_args.seed, "Campaign salt seed (omit for random)");

    RunHoneypotArgs hp_args;
    auto* hp_cmd = app.add_subcommand("run-honeypot", "Run a single live honeypot");
    hp_cmd->add_option("--id", hp_args.id, "Honeypot id");
    hp_cmd->add_option("--server", hp_args.server, "Indexing server, [name@]host:port")->required();
    hp_cmd->add_option("--strategy", hp_args.strategy, "no-content | random-content");
    hp_cmd->add_option("--out", hp_args.out, "Output directory")->required();
    hp_cmd->add_option("--file", hp_args.files, "Advertise '<32 hex> <size> <name>' (repeatable)");
    hp_cmd->add_option("--listen", hp_args.listen, "Peer port (0 = ephemeral)");
    hp_cmd->add_flag("--control", hp_args.control, "Expose the manager control channel");
    hp_cmd->add_option("--control-port", hp_args.control_port, "Control port (0 = ephemeral)");
    hp_cmd->add_flag("--greedy", hp_args.greedy, "Accrete the shared list from peers");
    hp_cmd->add_option("--greedy-window", hp_args.greedy_window_h, "Accretion window, hours");
    hp_cmd->add_option("--duration", hp_args.duration_s, "Stop after this many seconds");
    hp_cmd->add_option("--seed", hp_args.seed, "Campaign salt seed (omit for random)");

    AnonymizeArgs anon_args;
    auto* anon_cmd = app.add_subcommand("anonymize", "Merge step-1 logs into a unified dataset");
    anon_cmd->add_option("logs", anon_args.logs, "Honeypot log files")->required();
    anon_cmd->add_option("--out", anon_args.out, "Output directory")->required();
    anon_cmd->add_option("--threshold", anon_args.threshold, "Filename rare-word threshold");

    AnalyzeArgs an_args;
    auto* an_cmd = app.add_subcommand("analyze", "Reports over a unified log");
    an_cmd->add_option("log", an_args.log, "Unified log file")->required();
    an_cmd->add_option("--report", an_args.report, "Report name (see --help text)");
    an_cmd->add_option("--out", an_args.out, "CSV output path (default: stdout)");
    an_cmd->add_option("--plan", an_args.plan, "Plan file for per-strategy reports");
    an_cmd->add_option("--bucket", an_args.bucket_s, "Bucket size in seconds");
    an_cmd->add_option("--trials", an_args.trials, "Resampling trials");
    an_cmd->add_option("--seed", an_args.seed, "Resampling seed");

    // Unknown subcommand: suggest before CLI11 reports an extras error.
    if (argc > 1 && argv[1][0] != '-') {
        std::string given = argv[1];
        bool known = false;
        for (const auto& name : kSubcommands) known = known || name == given;
        if (!known) return suggest_unknown(given);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (sim_cmd->parsed()) return cmd_run_sim(sim_args);
        if (mgr_cmd->parsed()) return cmd_run_manager(mgr_args);
        if (hp_cmd->parsed()) return cmd_run_honeypot(hp_args);
        if (anon_cmd->parsed()) return cmd_anonymize(anon_args);
        if (an_cmd->parsed()) return cmd_analyze(an_args);
    } catch (const std::exception& e) {
        std::cerr << "hnl: " << e.what() << "\n";
        return 2;
    }

    std::cout << app.help();
    return 0;
}
