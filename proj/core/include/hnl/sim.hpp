// SPDX-License-Identifier: Apache-2.0
// Deterministic discrete-event simulation of an eDonkey-style indexing server
// plus a synthetic peer population, used to exercise the honeypots, the
// manager merge, and the analytics at desk scale.
//
// The clock is int64 microseconds from simulation start. One seeded generator
// drives every draw in event order, so identical (config, plan) inputs yield
// byte-identical outputs. Log records keep millisecond timestamps.
//
// Peer pacing mirrors observed client behavior: a peer never pipelines; after
// a served part it waits a variable service delay, after silence it waits
// exactly the configured timeout. Peers blacklist a honeypot permanently once
// accumulated evidence (bad parts or silences) passes a geometric draw, and
// blacklist reports spread: the more reports a honeypot has, the more likely
// other peers skip it before ever contacting it.
#pragma once

#include "hnl/manager.hpp"
#include "hnl/plan.hpp"
#include "hnl/protocol.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace hnl::sim {

struct Diurnal {
    double amplitude = 0.5;   // in [0, 1)
    double peak_hour = 14.0;  // UTC hour of maximal activity; period is 24 h
};

struct SimConfig {
    std::uint64_t seed = 1;
    double duration_s = 86'400.0;
    std::size_t n_peers = 1000;
    std::size_t n_servers = 1;
    std::size_t catalog_size = 50;
    double zipf_s = 1.0;  // popularity exponent over the catalog
    Diurnal diurnal;
    double peer_exchange_prob = 0.05;  // off-server discovery
    double timeout_no_answer_s = 30.0;
    double detect_random_content = 10.0;  // mean bad parts before blacklisting
    double detect_no_content = 3.0;       // mean silences before blacklisting
    double startup_delay_mean_s = 600.0;  // exp. delay before a honeypot is found

    // Desk-scale behavior knobs.
    double sessions_per_peer_per_day = 0.3;
    double service_mean_s = 4.0;
    double share_list_prob = 0.75;
    double requests_per_contact_mean = 8.0;
    double provider_fanout_mean = 2.5;
    double interest_mean = 3.0;
    double shares_mean = 5.0;
    double low_id_prob = 0.15;
    double gossip_max_avoid = 0.85;
    double gossip_half_frac = 0.02;  // report half-saturation, fraction of n_peers
    std::int64_t start_time_ms = 0;

    // Scenario generation (used when no explicit plan is given).
    std::string scenario = "distributed";  // distributed | greedy | custom
    std::size_t n_honeypots = 24;
    std::size_t n_advertised = 4;
};

// Empty string when the configuration is sound.
std::string validate(const SimConfig& cfg);

struct ConfigParseResult {
    std::optional<SimConfig> config;
    std::string error;
};

ConfigParseResult parse_sim_config_text(std::string_view text);
ConfigParseResult load_sim_config(const std::string& path);
std::string format_sim_config(const SimConfig& cfg);

struct CatalogEntry {
    proto::FileMeta meta;
    double weight;  // normalized popularity
};

// Deterministic synthetic catalog: ids/sizes/names from the seed, Zipf weights.
std::vector<CatalogEntry> make_catalog(const SimConfig& cfg);

// Plans for the two bundled scenarios. `distributed` runs n_honeypots on one
// server, alternating strategies, all advertising the same top catalog files;
// `greedy` runs a single silent honeypot that accretes its shared list from
// peers for the first day.
plan::DeploymentPlan make_scenario_plan(const SimConfig& cfg,
                                        const std::vector<CatalogEntry>& catalog);

struct SimResult {
    manager::MergeStats merge;
    std::uint64_t events = 0;
    std::uint64_t trace_rows = 0;
    std::uint64_t sessions = 0;
    std::size_t honeypots_connected = 0;
    std::size_t honeypots_failed = 0;
    std::string unified_path;
    std::string files_path;
    std::string trace_path;
    std::string plan_path;
    std::string status_path;
};

// Runs the full pipeline: events -> per-honeypot logs (step-1 anonymized) ->
// manager merge -> unified log + files table, plus the event trace CSV
// (time_us,event,peer,honeypot,file,detail).
SimResult run_simulation(const SimConfig& cfg, const plan::DeploymentPlan& plan,
                         const std::string& out_dir);

// --- pieces exposed for direct testing ---------------------------------------

// Gap to the next request: exactly the timeout after silence, a variable
// service delay after a served part.
std::int64_t next_request_gap_us(bool served, std::int64_t timeout_us, double service_mean_s,
                                 std::mt19937_64& rng);

// Geometric draw on {1, 2, ...} with the given mean.
std::uint32_t draw_detection_threshold(double mean, std::mt19937_64& rng);

struct Standing {
    std::uint32_t bad = 0;
    std::uint32_t silent = 0;
    std::uint32_t bad_threshold = 0;     // 0 = not drawn yet
    std::uint32_t silent_threshold = 0;  // 0 = not drawn yet
    bool listed = false;
};

enum class Evidence : std::uint8_t { BadPart, Silence };

// Returns true when this evidence tips the peer into blacklisting.
bool blacklist_update(Standing& standing, Evidence evidence, double mean_bad, double mean_silent,
                      std::mt19937_64& rng);

}  // namespace hnl::sim
