// SPDX-License-Identifier: Apache-2.0
#include "hnl/plan.hpp"

#include "hnl/bytes.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace hnl::plan {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(std::string(s), &used);
        return used == s.size();
    } catch (...) {
        return false;
    }
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_bool(std::string_view s, bool& out) {
    if (s == "true" || s == "1" || s == "yes") {
        out = true;
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        out = false;
        return true;
    }
    return false;
}

// "<32 hex> <size> <name with spaces>"
std::optional<proto::FileMeta> parse_file_line(std::string_view v) {
    auto sp1 = v.find(' ');
    if (sp1 == std::string_view::npos) return std::nullopt;
    auto sp2 = v.find(' ', sp1 + 1);
    if (sp2 == std::string_view::npos) return std::nullopt;
    proto::FileMeta meta;
    if (!from_hex(v.substr(0, sp1), meta.file_id)) return std::nullopt;
    if (!parse_uint(v.substr(sp1 + 1, sp2 - sp1 - 1), meta.size) || meta.size == 0)
        return std::nullopt;
    meta.name = std::string(trim(v.substr(sp2 + 1)));
    if (meta.name.empty()) return std::nullopt;
    return meta;
}

}  // namespace

std::optional<honeypot::ServerInfo> parse_server_spec(std::string_view spec) {
    honeypot::ServerInfo info;
    auto at = spec.find('@');
    if (at != std::string_view::npos) {
        info.name = std::string(spec.substr(0, at));
        spec = spec.substr(at + 1);
    }
    auto colon = spec.rfind(':');
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    info.host = std::string(spec.substr(0, colon));
    if (!parse_uint(spec.substr(colon + 1), info.port) || info.port == 0) return std::nullopt;
    if (info.name.empty()) info.name = info.host;
    return info;
}

std::string validate(const DeploymentPlan& plan) {
    std::set<std::string> ids;
    for (const auto& hp : plan.honeypots) {
        if (hp.id.empty()) return "honeypot with empty id";
        if (!ids.insert(hp.id).second) return "duplicate honeypot id: " + hp.id;
        if (hp.server.host.empty()) return "honeypot " + hp.id + " has no server";
    }
    for (const auto& [id, files] : plan.advertisements) {
        if (ids.count(id) == 0) return "advertisement targets undeclared honeypot: " + id;
        (void)files;
    }
    return "";
}

PlanParseResult parse_plan_text(std::string_view text) {
    DeploymentPlan plan;
    HoneypotSpec* current = nullptr;
    std::vector<std::size_t> overridden;  // honeypots with explicit server=

    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto fail = [&](const std::string& msg) {
        return PlanParseResult{std::nullopt, "plan line " + std::to_string(line_no) + ": " + msg};
    };

    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        std::string_view line = trim(text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                                    : eol - pos));
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        if (line == "[honeypot]") {
            plan.honeypots.emplace_back();
            current = &plan.honeypots.back();
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) return fail("expected key=value");
        std::string_view key = trim(line.substr(0, eq));
        std::string_view value = trim(line.substr(eq + 1));

        if (current == nullptr) {
            if (key == "poll_interval") {
                if (!parse_double(value, plan.poll_interval_s) || plan.poll_interval_s <= 0)
                    return fail("bad poll_interval");
            } else if (key == "gather_interval") {
                if (!parse_double(value, plan.gather_interval_s) || plan.gather_interval_s <= 0)
                    return fail("bad gather_interval");
            } else if (key == "assignment") {
                if (value == "same-server")
                    plan.assignment = Assignment::SameServer;
                else if (value == "spread")
                    plan.assignment = Assignment::Spread;
                else
                    return fail("assignment must be same-server or spread");
            } else if (key == "server") {
                auto srv = parse_server_spec(value);
                if (!srv) return fail("bad server spec");
                plan.server_pool.push_back(*srv);
            } else if (key == "embedded_server") {
                if (!parse_uint(value, plan.embedded_server_port)) return fail("bad embedded_server");
            } else if (key == "filename_threshold") {
                if (!parse_uint(value, plan.filename_threshold) || plan.filename_threshold == 0)
                    return fail("bad filename_threshold");
            } else {
                return fail("unknown global key: " + std::string(key));
            }
            continue;
        }

        if (key == "id") {
            current->id = std::string(value);
        } else if (key == "strategy") {
            auto s = honeypot::strategy_from(value);
            if (!s) return fail("strategy must be no-content or random-content");
            current->strategy = *s;
        } else if (key == "greedy") {
            if (!parse_bool(value, current->greedy)) return fail("bad greedy flag");
        } else if (key == "greedy_window_h") {
            if (!parse_double(value, current->greedy_window_h) || current->greedy_window_h < 0)
                return fail("bad greedy_window_h");
        } else if (key == "listen") {
            if (!parse_uint(value, current->listen_port)) return fail("bad listen port");
        } else if (key == "server") {
            auto srv = parse_server_spec(value);
            if (!srv) return fail("bad server spec");
            current->server = *srv;
            overridden.push_back(plan.honeypots.size() - 1);
        } else if (key == "file") {
            auto meta = parse_file_line(value);
            if (!meta) return fail("bad file line (want: <32 hex> <size> <name>)");
            plan.advertisements[current->id].push_back(std::move(*meta));
        } else {
            return fail("unknown honeypot key: " + std::string(key));
        }
    }

    // Resolve pool assignment for honeypots without an explicit server.
    std::size_t next = 0;
    for (std::size_t i = 0; i < plan.honeypots.size(); ++i) {
        auto& hp = plan.honeypots[i];
        if (!hp.server.host.empty()) continue;
        if (plan.server_pool.empty()) {
            return {std::nullopt, "honeypot " + hp.id + " has no server and the pool is empty"};
        }
        std::size_t idx = plan.assignment == Assignment::Spread ? next++ % plan.server_pool.size() : 0;
        hp.server = plan.server_pool[idx];
    }

    // file= lines are keyed by the id in force when they appeared; an id set
    // after file= lines in the same section would orphan them.
    std::string err = validate(plan);
    if (!err.empty()) return {std::nullopt, err};
    return {plan, ""};
}

PlanParseResult load_plan(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {std::nullopt, "cannot open plan file: " + path};
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_plan_text(ss.str());
}

std::string format_plan(const DeploymentPlan& plan) {
    std::ostringstream out;
    out << "poll_interval=" << plan.poll_interval_s << "\n";
    out << "gather_interval=" << plan.gather_interval_s << "\n";
    out << "assignment=" << (plan.assignment == Assignment::Spread ? "spread" : "same-server")
        << "\n";
    for (const auto& srv : plan.server_pool) {
        out << "server=" << srv.name << "@" << srv.host << ":" << srv.port << "\n";
    }
    if (plan.embedded_server_port != 0) out << "embedded_server=" << plan.embedded_server_port << "\n";
    out << "filename_threshold=" << plan.filename_threshold << "\n";
    for (const auto& hp : plan.honeypots) {
        out << "\n[honeypot]\n";
        out << "id=" << hp.id << "\n";
        out << "strategy=" << honeypot::to_string(hp.strategy) << "\n";
        out << "greedy=" << (hp.greedy ? "true" : "false") << "\n";
        if (hp.greedy) out << "greedy_window_h=" << hp.greedy_window_h << "\n";
        if (hp.listen_port != 0) out << "listen=" << hp.listen_port << "\n";
        out << "server=" << hp.server.name << "@" << hp.server.host << ":" << hp.server.port << "\n";
        auto it = plan.advertisements.find(hp.id);
        if (it != plan.advertisements.end()) {
            for (const auto& f : it->second) {
                out << "file=" << to_hex(f.file_id) << " " << f.size << " " << f.name << "\n";
            }
        }
    }
    return out.str();
}

bool save_plan(const DeploymentPlan& plan, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << format_plan(plan);
    return static_cast<bool>(out);
}

std::map<std::string, honeypot::Strategy> strategy_groups(const DeploymentPlan& plan) {
    std::map<std::string, honeypot::Strategy> groups;
    for (const auto& hp : plan.honeypots) groups[hp.id] = hp.strategy;
    return groups;
}

}  // namespace hnl::plan
