// SPDX-License-Identifier: Apache-2.0
// Deployment plans: which honeypots to run, where, with which strategy and
// which advertised files.
//
// Plan file: line-oriented key=value text. Global keys first, then one
// [honeypot] section per honeypot.
//
//   poll_interval=30            # seconds
//   gather_interval=3600        # seconds
//   assignment=same-server      # or: spread (round-robin over the pool)
//   server=main@srv0:4661       # repeatable; name@host:port, name optional
//   embedded_server=0           # live mode: port of a built-in index server
//   filename_threshold=5        # rare-word threshold for files.tsv
//
//   [honeypot]
//   id=hp-001
//   strategy=no-content         # or random-content
//   greedy=false
//   greedy_window_h=24
//   listen=0                    # live mode peer port (0 = ephemeral)
//   server=alt@srv1:4661        # optional per-honeypot override
//   file=<32 hex> <size> <name...>   # repeatable advertisement
#pragma once

#include "hnl/honeypot.hpp"
#include "hnl/protocol.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hnl::plan {

enum class Assignment : std::uint8_t { SameServer, Spread };

struct HoneypotSpec {
    std::string id;
    honeypot::ServerInfo server;
    honeypot::Strategy strategy = honeypot::Strategy::NoContent;
    bool greedy = false;
    double greedy_window_h = 24.0;
    std::uint16_t listen_port = 0;
};

struct DeploymentPlan {
    std::vector<HoneypotSpec> honeypots;
    std::map<std::string, std::vector<proto::FileMeta>> advertisements;  // honeypot_id -> files
    double poll_interval_s = 30.0;
    double gather_interval_s = 3600.0;
    Assignment assignment = Assignment::SameServer;
    std::vector<honeypot::ServerInfo> server_pool;
    std::uint16_t embedded_server_port = 0;
    std::size_t filename_threshold = 5;
};

// Empty string on success, else a description of the first problem
// (duplicate ids, advertisement for an undeclared honeypot, missing server).
std::string validate(const DeploymentPlan& plan);

struct PlanParseResult {
    std::optional<DeploymentPlan> plan;
    std::string error;
};

PlanParseResult parse_plan_text(std::string_view text);
PlanParseResult load_plan(const std::string& path);

std::string format_plan(const DeploymentPlan& plan);
bool save_plan(const DeploymentPlan& plan, const std::string& path);

std::optional<honeypot::ServerInfo> parse_server_spec(std::string_view spec);

// honeypot_id -> strategy, for the per-strategy analyses.
std::map<std::string, honeypot::Strategy> strategy_groups(const DeploymentPlan& plan);

}  // namespace hnl::plan
