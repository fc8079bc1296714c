// SPDX-License-Identifier: Apache-2.0
#include "hnl/sim.hpp"

#include "hnl/anonymize.hpp"
#include "hnl/bytes.hpp"
#include "hnl/diag.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace hnl::sim {

namespace {

constexpr std::int64_t kUsPerSecond = 1'000'000;

double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exp_draw(std::mt19937_64& rng, double mean) {
    return -mean * std::log1p(-u01(rng));
}

double normal_draw(std::mt19937_64& rng) {
    double u1 = 1.0 - u01(rng);
    double u2 = u01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint32_t poisson_draw(std::mt19937_64& rng, double lambda) {
    if (lambda <= 0.0) return 0;
    double limit = std::exp(-lambda);
    std::uint32_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= u01(rng);
    } while (p > limit);
    return k - 1;
}

}  // namespace

std::int64_t next_request_gap_us(bool served, std::int64_t timeout_us, double service_mean_s,
                                 std::mt19937_64& rng) {
    if (!served) return timeout_us;  // the client's retry timeout, exactly
    double delay_s = exp_draw(rng, service_mean_s);
    return 200'000 + static_cast<std::int64_t>(delay_s * 1e6);
}

std::uint32_t draw_detection_threshold(double mean, std::mt19937_64& rng) {
    if (mean <= 1.0) return 1;
    double p = 1.0 / mean;
    double u = u01(rng);
    // Geometric on {1, 2, ...}: mean 1/p.
    double k = std::floor(std::log1p(-u) / std::log1p(-p));
    if (k < 0) k = 0;
    if (k > 4e9) k = 4e9;
    return static_cast<std::uint32_t>(k) + 1;
}

bool blacklist_update(Standing& standing, Evidence evidence, double mean_bad, double mean_silent,
                      std::mt19937_64& rng) {
    if (standing.listed) return false;
    if (evidence == Evidence::BadPart) {
        if (standing.bad_threshold == 0) standing.bad_threshold = draw_detection_threshold(mean_bad, rng);
        if (++standing.bad >= standing.bad_threshold) standing.listed = true;
    } else {
        if (standing.silent_threshold == 0)
            standing.silent_threshold = draw_detection_threshold(mean_silent, rng);
        if (++standing.silent >= standing.silent_threshold) standing.listed = true;
    }
    return standing.listed;
}

// --- config -------------------------------------------------------------------

std::string validate(const SimConfig& cfg) {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (cfg.duration_s < 0) return "duration must be >= 0";
    if (cfg.n_servers == 0) return "need at least one server";
    if (cfg.catalog_size == 0) return "catalog must not be empty";
    if (cfg.zipf_s < 0) return "zipf exponent must be >= 0";
    if (!(cfg.diurnal.amplitude >= 0.0 && cfg.diurnal.amplitude < 1.0))
        return "diurnal amplitude must lie in [0, 1)";
    if (!prob(cfg.peer_exchange_prob)) return "peer_exchange_prob must lie in [0, 1]";
    if (!prob(cfg.share_list_prob)) return "share_list_prob must lie in [0, 1]";
    if (!prob(cfg.low_id_prob)) return "low_id_prob must lie in [0, 1]";
    if (!prob(cfg.gossip_max_avoid)) return "gossip_max_avoid must lie in [0, 1]";
    if (cfg.gossip_half_frac < 0) return "gossip_half_frac must be >= 0";
    if (cfg.timeout_no_answer_s <= 0) return "timeout_no_answer must be positive";
    if (cfg.detect_no_content < 1 || cfg.detect_random_content < 1)
        return "detection means must be >= 1";
    if (cfg.detect_no_content > cfg.detect_random_content)
        return "detect_no_content must not exceed detect_random_content";
    if (cfg.startup_delay_mean_s < 0) return "startup delay must be >= 0";
    if (cfg.sessions_per_peer_per_day < 0) return "session rate must be >= 0";
    if (cfg.service_mean_s <= 0) return "service_mean must be positive";
    if (cfg.requests_per_contact_mean < 1) return "requests_per_contact_mean must be >= 1";
    if (cfg.provider_fanout_mean < 1) return "provider_fanout_mean must be >= 1";
    if (cfg.scenario != "distributed" && cfg.scenario != "greedy" && cfg.scenario != "custom")
        return "scenario must be distributed, greedy or custom";
    if (cfg.scenario != "custom" && cfg.n_honeypots == 0) return "need at least one honeypot";
    if (cfg.n_advertised == 0 || cfg.n_advertised > cfg.catalog_size)
        return "n_advertised must lie in [1, catalog_size]";
    return "";
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

ConfigParseResult parse_sim_config_text(std::string_view text) {
    SimConfig cfg;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        std::string_view line = trim(text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                                    : eol - pos));
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            return {std::nullopt, "config line " + std::to_string(line_no) + ": expected key=value"};
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));

        auto as_double = [&](double& out) {
            try {
                std::size_t used = 0;
                out = std::stod(value, &used);
                return used == value.size();
            } catch (...) {
                return false;
            }
        };
        auto as_u64 = [&](std::uint64_t& out) {
            try {
                std::size_t used = 0;
                out = std::stoull(value, &used);
                return used == value.size();
            } catch (...) {
                return false;
            }
        };

        bool ok = true;
        std::uint64_t u = 0;
        if (key == "seed") {
            ok = as_u64(cfg.seed);
        } else if (key == "duration_s") {
            ok = as_double(cfg.duration_s);
        } else if (key == "duration_days") {
            double days = 0;
            ok = as_double(days);
            cfg.duration_s = days * 86'400.0;
        } else if (key == "n_peers") {
            ok = as_u64(u);
            cfg.n_peers = u;
        } else if (key == "n_servers") {
            ok = as_u64(u);
            cfg.n_servers = u;
        } else if (key == "catalog_size") {
            ok = as_u64(u);
            cfg.catalog_size = u;
        } else if (key == "zipf_s") {
            ok = as_double(cfg.zipf_s);
        } else if (key == "diurnal_amplitude") {
            ok = as_double(cfg.diurnal.amplitude);
        } else if (key == "diurnal_peak_hour") {
            ok = as_double(cfg.diurnal.peak_hour);
        } else if (key == "peer_exchange_prob") {
            ok = as_double(cfg.peer_exchange_prob);
        } else if (key == "timeout_no_answer_s") {
            ok = as_double(cfg.timeout_no_answer_s);
        } else if (key == "detect_random_content") {
            ok = as_double(cfg.detect_random_content);
        } else if (key == "detect_no_content") {
            ok = as_double(cfg.detect_no_content);
        } else if (key == "startup_delay_mean_s") {
            ok = as_double(cfg.startup_delay_mean_s);
        } else if (key == "sessions_per_peer_per_day") {
            ok = as_double(cfg.sessions_per_peer_per_day);
        } else if (key == "service_mean_s") {
            ok = as_double(cfg.service_mean_s);
        } else if (key == "share_list_prob") {
            ok = as_double(cfg.share_list_prob);
        } else if (key == "requests_per_contact_mean") {
            ok = as_double(cfg.requests_per_contact_mean);
        } else if (key == "provider_fanout_mean") {
            ok = as_double(cfg.provider_fanout_mean);
        } else if (key == "interest_mean") {
            ok = as_double(cfg.interest_mean);
        } else if (key == "shares_mean") {
            ok = as_double(cfg.shares_mean);
        } else if (key == "low_id_prob") {
            ok = as_double(cfg.low_id_prob);
        } else if (key == "gossip_max_avoid") {
            ok = as_double(cfg.gossip_max_avoid);
        } else if (key == "gossip_half_frac") {
            ok = as_double(cfg.gossip_half_frac);
        } else if (key == "start_time_ms") {
            std::uint64_t ms = 0;
            ok = as_u64(ms);
            cfg.start_time_ms = static_cast<std::int64_t>(ms);
        } else if (key == "scenario") {
            cfg.scenario = value;
        } else if (key == "n_honeypots") {
            ok = as_u64(u);
            cfg.n_honeypots = u;
        } else if (key == "n_advertised") {
            ok = as_u64(u);
            cfg.n_advertised = u;
        } else {
            return {std::nullopt, "config line " + std::to_string(line_no) + ": unknown key " + key};
        }
        if (!ok)
            return {std::nullopt, "config line " + std::to_string(line_no) + ": bad value for " + key};
    }
    std::string err = validate(cfg);
    if (!err.empty()) return {std::nullopt, err};
    return {cfg, ""};
}

ConfigParseResult load_sim_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {std::nullopt, "cannot open config file: " + path};
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_sim_config_text(ss.str());
}

std::string format_sim_config(const SimConfig& cfg) {
    std::ostringstream out;
    out << "seed=" << cfg.seed << "\n";
    out << "duration_s=" << cfg.duration_s << "\n";
    out << "n_peers=" << cfg.n_peers << "\n";
    out << "n_servers=" << cfg.n_servers << "\n";
    out << "catalog_size=" << cfg.catalog_size << "\n";
    out << "zipf_s=" << cfg.zipf_s << "\n";
    out << "diurnal_amplitude=" << cfg.diurnal.amplitude << "\n";
    out << "diurnal_peak_hour=" << cfg.diurnal.peak_hour << "\n";
    out << "peer_exchange_prob=" << cfg.peer_exchange_prob << "\n";
    out << "timeout_no_answer_s=" << cfg.timeout_no_answer_s << "\n";
    out << "detect_random_content=" << cfg.detect_random_content << "\n";
    out << "detect_no_content=" << cfg.detect_no_content << "\n";
    out << "startup_delay_mean_s=" << cfg.startup_delay_mean_s << "\n";
    out << "sessions_per_peer_per_day=" << cfg.sessions_per_peer_per_day << "\n";
    out << "service_mean_s=" << cfg.service_mean_s << "\n";
    out << "share_list_prob=" << cfg.share_list_prob << "\n";
    out << "requests_per_contact_mean=" << cfg.requests_per_contact_mean << "\n";
    out << "provider_fanout_mean=" << cfg.provider_fanout_mean << "\n";
    out << "interest_mean=" << cfg.interest_mean << "\n";
    out << "shares_mean=" << cfg.shares_mean << "\n";
    out << "low_id_prob=" << cfg.low_id_prob << "\n";
    out << "gossip_max_avoid=" << cfg.gossip_max_avoid << "\n";
    out << "gossip_half_frac=" << cfg.gossip_half_frac << "\n";
    out << "start_time_ms=" << cfg.start_time_ms << "\n";
    out << "scenario=" << cfg.scenario << "\n";
    out << "n_honeypots=" << cfg.n_honeypots << "\n";
    out << "n_advertised=" << cfg.n_advertised << "\n";
    return out.str();
}

// --- catalog ------------------------------------------------------------------

namespace {

const char* const kNameWords[] = {
    "summer", "holiday", "video",   "linux",   "distribution", "live",    "concert",
    "album",  "episode", "season",  "movie",   "song",         "mix",     "classic",
    "story",  "world",   "night",   "day",     "dance",        "party",   "trailer",
    "series", "final",   "special", "edition", "version",      "audio",   "track",
    "studio", "cover",   "piano",   "guitar",  "demo",         "intro",   "theme",
    "title",  "chapter", "volume",  "part",    "disc",         "book",    "text",
    "paper",  "notes",   "lecture", "course",  "guide",        "install", "best",
    "hits",
};
constexpr std::size_t kNameWordCount = sizeof(kNameWords) / sizeof(kNameWords[0]);

const char* const kExtensions[] = {".avi", ".mkv", ".mp3", ".iso", ".pdf", ".txt"};

const char* const kClientNames[] = {
    "mule 0.49b", "mule 0.48a", "donkey 1.3", "donkey 2.0", "hybrid 0.9", "shareling 4",
};

}  // namespace

std::vector<CatalogEntry> make_catalog(const SimConfig& cfg) {
    std::mt19937_64 rng(cfg.seed ^ 0xCA7A106ULL);
    std::vector<CatalogEntry> catalog;
    catalog.reserve(cfg.catalog_size);
    std::set<proto::FileId> ids;

    double norm = 0.0;
    for (std::size_t r = 0; r < cfg.catalog_size; ++r)
        norm += std::pow(static_cast<double>(r + 1), -cfg.zipf_s);

    for (std::size_t r = 0; r < cfg.catalog_size; ++r) {
        CatalogEntry entry;
        do {
            for (auto& b : entry.meta.file_id) b = static_cast<std::uint8_t>(rng());
        } while (!ids.insert(entry.meta.file_id).second);

        std::string name;
        std::size_t words = 2 + rng() % 3;
        for (std::size_t w = 0; w < words; ++w) {
            if (!name.empty()) name += ' ';
            name += kNameWords[rng() % kNameWordCount];
        }
        if (u01(rng) < 0.3) {
            // A rare token unique to this file; exercises name thresholding.
            char buf[16];
            std::snprintf(buf, sizeof buf, " x%06llx",
                          static_cast<unsigned long long>(rng() & 0xFFFFFF));
            name += buf;
        }
        name += kExtensions[rng() % 6];
        entry.meta.name = name;
        entry.meta.size = static_cast<std::uint64_t>(std::pow(2.0, 16.0 + u01(rng) * 17.5));
        if (entry.meta.size == 0) entry.meta.size = 1;
        entry.weight = std::pow(static_cast<double>(r + 1), -cfg.zipf_s) / norm;
        catalog.push_back(std::move(entry));
    }
    return catalog;
}

plan::DeploymentPlan make_scenario_plan(const SimConfig& cfg,
                                        const std::vector<CatalogEntry>& catalog) {
    plan::DeploymentPlan dp;
    dp.poll_interval_s = 30.0;
    dp.gather_interval_s = 3600.0;
    dp.assignment = plan::Assignment::SameServer;
    for (std::size_t s = 0; s < cfg.n_servers; ++s) {
        dp.server_pool.push_back({"sim" + std::to_string(s), "srv" + std::to_string(s), 4661});
    }

    if (cfg.scenario == "greedy") {
        plan::HoneypotSpec hp;
        hp.id = "hp-greedy";
        hp.server = dp.server_pool[0];
        hp.strategy = honeypot::Strategy::NoContent;
        hp.greedy = true;
        hp.greedy_window_h = 24.0;
        dp.honeypots.push_back(hp);
        std::size_t seeds = std::min<std::size_t>(3, catalog.size());
        for (std::size_t i = 0; i < seeds; ++i)
            dp.advertisements[hp.id].push_back(catalog[i].meta);
        return dp;
    }

    // distributed: alternating strategies, everyone advertising the same files.
    for (std::size_t i = 0; i < cfg.n_honeypots; ++i) {
        plan::HoneypotSpec hp;
        char buf[16];
        std::snprintf(buf, sizeof buf, "hp-%03zu", i + 1);
        hp.id = buf;
        hp.server = dp.server_pool[0];
        hp.strategy = (i % 2 == 0) ? honeypot::Strategy::NoContent : honeypot::Strategy::RandomContent;
        dp.honeypots.push_back(hp);
        for (std::size_t f = 0; f < cfg.n_advertised && f < catalog.size(); ++f)
            dp.advertisements[hp.id].push_back(catalog[f].meta);
    }
    return dp;
}

// --- the event engine -----------------------------------------------------------

namespace {

struct SimPeer {
    proto::UserId user_id{};
    std::uint32_t ip = 0;
    std::uint32_t client_id = 0;
    std::uint16_t port = 4662;
    std::uint8_t name_idx = 0;
    std::uint32_t version = 0;
    std::uint32_t server = 0;
    double rate_weight = 1.0;
    std::vector<std::uint32_t> interests;  // catalog indices
    std::vector<std::uint32_t> shares;
    std::unordered_map<std::uint32_t, Standing> standing;  // by honeypot index
    std::unordered_set<std::uint32_t> contacted;
    std::unordered_set<std::uint32_t> active;
};

struct SimHoneypot {
    explicit SimHoneypot(honeypot::EngineConfig cfg) : engine(std::move(cfg)) {}
    honeypot::Engine engine;
    plan::HoneypotSpec spec;
    int server_idx = -1;
    bool connected = false;
    std::int64_t discover_at_us = std::numeric_limits<std::int64_t>::max();
    std::uint32_t ip = 0;
    std::vector<LogRecord> logs;
    std::set<std::pair<std::uint8_t, proto::FileId>> obs_seen;
    std::vector<manager::FileRow> obs_rows;
    std::uint64_t bad_reports = 0;
};

struct SimServer {
    std::string host;
    std::map<proto::FileId, std::vector<std::uint32_t>> providers;
};

struct Contact {
    std::uint32_t peer = 0;
    std::uint32_t honeypot = 0;
    std::uint32_t file = 0;  // catalog index
    std::uint64_t session = 0;
    std::uint32_t budget = 0;
    std::uint64_t next_offset = 0;
    std::uint32_t pending_parts = 0;
    bool served = false;
    bool done = false;
};

enum class Ev : std::uint8_t {
    Arrival,
    Connect,
    Tick,
    Hello,
    SharedList,
    StartUpload,
    Request,
    RequestDone,
};

struct Event {
    std::int64_t t = 0;
    std::uint64_t seq = 0;
    Ev kind = Ev::Arrival;
    std::uint32_t target = 0;  // honeypot or contact index

    bool operator>(const Event& other) const {
        if (t != other.t) return t > other.t;
        return seq > other.seq;
    }
};

class Simulation {
public:
    Simulation(const SimConfig& cfg, const plan::DeploymentPlan& dp, const std::string& out_dir)
        : cfg_(cfg), plan_(dp), out_dir_(out_dir), rng_(cfg.seed) {}

    SimResult run();

private:
    void push(std::int64_t t, Ev kind, std::uint32_t target) {
        if (t > duration_us_) return;
        queue_.push({t, seq_++, kind, target});
    }

    std::int64_t now_ms(std::int64_t t_us) const { return cfg_.start_time_ms + t_us / 1000; }

    void trace(std::int64_t t, const char* event, const std::string& peer,
               const std::string& honeypot, const std::string& file, const std::string& detail) {
        trace_ << t << ',' << event << ',' << peer << ',' << honeypot << ',' << file << ','
               << detail << '\n';
        ++trace_rows_;
    }

    double rate_per_us(std::int64_t t_us) const {
        double base = static_cast<double>(cfg_.n_peers) * cfg_.sessions_per_peer_per_day / 86'400.0;
        double hour = std::fmod(static_cast<double>(cfg_.start_time_ms) / 3.6e6 +
                                    static_cast<double>(t_us) / 3.6e9,
                                24.0);
        double phase = 2.0 * 3.14159265358979323846 * (hour - cfg_.diurnal.peak_hour) / 24.0;
        return base * (1.0 + cfg_.diurnal.amplitude * std::cos(phase)) / 1e6;
    }

    void build_population();
    void setup_honeypots();
    void register_files(std::uint32_t hp, const std::vector<honeypot::FileObservation>& obs);
    void record_logs(std::uint32_t hp, std::vector<LogRecord>& logs);

    void on_arrival(std::int64_t t);
    void on_connect(std::int64_t t, std::uint32_t hp);
    void on_tick(std::int64_t t, std::uint32_t hp);
    void on_hello(std::int64_t t, std::uint32_t contact);
    void on_shared_list(std::int64_t t, std::uint32_t contact);
    void on_start_upload(std::int64_t t, std::uint32_t contact);
    void do_request(std::int64_t t, std::uint32_t contact);
    void on_request_done(std::int64_t t, std::uint32_t contact);
    void end_contact(std::uint32_t contact, const char* why, std::int64_t t);

    honeypot::PeerContext context_of(const SimPeer& peer) const {
        return {{peer.ip, peer.port}, peer.user_id};
    }

    const SimConfig& cfg_;
    const plan::DeploymentPlan& plan_;
    std::string out_dir_;
    std::mt19937_64 rng_;

    std::int64_t duration_us_ = 0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;

    std::vector<CatalogEntry> catalog_;
    std::vector<double> zipf_cdf_;
    std::vector<SimServer> servers_;
    std::vector<SimHoneypot> honeypots_;
    std::vector<SimPeer> peers_;
    std::vector<double> peer_cdf_;
    std::vector<Contact> contacts_;

    std::ofstream trace_;
    std::uint64_t trace_rows_ = 0;
    std::uint64_t events_ = 0;
    std::uint64_t sessions_ = 0;
    double gossip_half_ = 1.0;
};

void Simulation::build_population() {
    catalog_ = make_catalog(cfg_);
    zipf_cdf_.resize(catalog_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < catalog_.size(); ++i) {
        acc += catalog_[i].weight;
        zipf_cdf_[i] = acc;
    }

    auto draw_catalog = [&](std::vector<std::uint32_t>& out, double mean) {
        std::uint32_t want = poisson_draw(rng_, mean);
        std::set<std::uint32_t> picked;
        for (std::uint32_t tries = 0; tries < want * 4 + 8 && picked.size() < want; ++tries) {
            double u = u01(rng_);
            auto it = std::lower_bound(zipf_cdf_.begin(), zipf_cdf_.end(), u);
            if (it == zipf_cdf_.end()) --it;
            picked.insert(static_cast<std::uint32_t>(it - zipf_cdf_.begin()));
        }
        out.assign(picked.begin(), picked.end());
    };

    std::unordered_set<std::uint32_t> used_ips;
    std::uint32_t low_counter = 1;
    peers_.resize(cfg_.n_peers);
    peer_cdf_.resize(cfg_.n_peers);
    double rate_acc = 0.0;
    for (std::size_t i = 0; i < cfg_.n_peers; ++i) {
        auto& peer = peers_[i];
        for (auto& b : peer.user_id) b = static_cast<std::uint8_t>(rng_());
        do {
            peer.ip = proto::kLowIdThreshold +
                      static_cast<std::uint32_t>(rng_() % (0xFFFFFFFFull - proto::kLowIdThreshold));
        } while (!used_ips.insert(peer.ip).second);
        peer.client_id = (u01(rng_) < cfg_.low_id_prob) ? low_counter++ : peer.ip;
        peer.name_idx = static_cast<std::uint8_t>(rng_() % 6);
        peer.version = 45 + static_cast<std::uint32_t>(rng_() % 15);
        peer.server = static_cast<std::uint32_t>(rng_() % cfg_.n_servers);
        peer.rate_weight = std::exp(0.75 * normal_draw(rng_));
        draw_catalog(peer.interests, cfg_.interest_mean);
        draw_catalog(peer.shares, cfg_.shares_mean);
        rate_acc += peer.rate_weight;
        peer_cdf_[i] = rate_acc;
    }
}

void Simulation::setup_honeypots() {
    servers_.resize(cfg_.n_servers);
    for (std::size_t s = 0; s < cfg_.n_servers; ++s) servers_[s].host = "srv" + std::to_string(s);

    anonymize::Salt salt = anonymize::salt_from_seed(cfg_.seed);
    std::unordered_set<std::uint32_t> used_ips;
    for (std::size_t i = 0; i < plan_.honeypots.size(); ++i) {
        const auto& spec = plan_.honeypots[i];
        honeypot::EngineConfig ec;
        ec.honeypot_id = spec.id;
        ec.server = spec.server;
        ec.strategy = spec.strategy;
        ec.greedy.enabled = spec.greedy;
        ec.greedy.accretion_deadline_ms =
            cfg_.start_time_ms + static_cast<std::int64_t>(spec.greedy_window_h * 3.6e6);
        ec.salt = salt;
        ec.content_seed = cfg_.seed ^ (0x9E3779B9ULL * (i + 1));
        ec.materialize_content = false;  // lengths matter here, bytes do not
        honeypots_.emplace_back(std::move(ec));
        auto& hp = honeypots_.back();
        hp.spec = spec;
        do {
            hp.ip = proto::kLowIdThreshold +
                    static_cast<std::uint32_t>(rng_() % (0xFFFFFFFFull - proto::kLowIdThreshold));
        } while (!used_ips.insert(hp.ip).second);
        for (std::size_t s = 0; s < servers_.size(); ++s) {
            if (servers_[s].host == spec.server.host) hp.server_idx = static_cast<int>(s);
        }
    }
}

void Simulation::register_files(std::uint32_t hp_idx,
                                const std::vector<honeypot::FileObservation>& obs) {
    auto& hp = honeypots_[hp_idx];
    for (const auto& o : obs) {
        auto key = std::make_pair(static_cast<std::uint8_t>(o.source), o.meta.file_id);
        if (hp.obs_seen.insert(key).second) {
            hp.obs_rows.push_back({hp.spec.id, o.source, o.meta.file_id, o.meta.size, o.meta.name});
        }
        if (o.source == honeypot::FileObservation::Source::Advertised && hp.server_idx >= 0) {
            auto& vec = servers_[static_cast<std::size_t>(hp.server_idx)].providers[o.meta.file_id];
            if (std::find(vec.begin(), vec.end(), hp_idx) == vec.end()) vec.push_back(hp_idx);
        }
    }
}

void Simulation::record_logs(std::uint32_t hp, std::vector<LogRecord>& logs) {
    for (auto& rec : logs) honeypots_[hp].logs.push_back(std::move(rec));
}

void Simulation::on_connect(std::int64_t t, std::uint32_t hp_idx) {
    auto& hp = honeypots_[hp_idx];
    bool ok = hp.server_idx >= 0;
    hp.connected = ok;
    hp.engine.on_connect_result(ok, ok ? hp.ip : 0, now_ms(t));
    trace(t, "connect", "-", hp.spec.id, "-", ok ? "ok" : "fail");
    if (!ok) return;

    hp.discover_at_us = t + static_cast<std::int64_t>(exp_draw(rng_, cfg_.startup_delay_mean_s) * 1e6);

    auto it = plan_.advertisements.find(hp.spec.id);
    if (it != plan_.advertisements.end()) {
        std::vector<honeypot::FileObservation> obs;
        auto msgs = hp.engine.advertise(it->second, now_ms(t), obs);
        register_files(hp_idx, obs);
        if (!msgs.empty()) trace(t, "offer", "-", hp.spec.id, "-",
                                 std::to_string(hp.engine.shared_files().size()));
    }
    push(t + 240 * kUsPerSecond, Ev::Tick, hp_idx);
}

void Simulation::on_tick(std::int64_t t, std::uint32_t hp_idx) {
    auto& hp = honeypots_[hp_idx];
    if (!hp.connected) return;
    auto msgs = hp.engine.tick(now_ms(t));
    if (!msgs.empty())
        trace(t, "offer", "-", hp.spec.id, "-", std::to_string(hp.engine.shared_files().size()));
    push(t + 240 * kUsPerSecond, Ev::Tick, hp_idx);
}

void Simulation::on_arrival(std::int64_t t) {
    // Schedule the next candidate before handling this one (stable draw order),
    // then thin: accept with probability rate(t)/max_rate.
    double max_rate = static_cast<double>(cfg_.n_peers) * cfg_.sessions_per_peer_per_day *
                      (1.0 + cfg_.diurnal.amplitude) / 86'400.0 / 1e6;
    if (max_rate <= 0) return;
    std::int64_t gap = static_cast<std::int64_t>(exp_draw(rng_, 1.0 / max_rate));
    push(t + std::max<std::int64_t>(gap, 1), Ev::Arrival, 0);
    if (u01(rng_) >= rate_per_us(t) / max_rate) return;

    // Pick a peer by activity weight.
    double u = u01(rng_) * peer_cdf_.back();
    auto pit = std::lower_bound(peer_cdf_.begin(), peer_cdf_.end(), u);
    if (pit == peer_cdf_.end()) --pit;
    std::uint32_t peer_idx = static_cast<std::uint32_t>(pit - peer_cdf_.begin());
    auto& peer = peers_[peer_idx];
    ++sessions_;

    if (peer.interests.empty()) {
        trace(t, "arrival", std::to_string(peer_idx), "-", "-", "idle");
        return;
    }
    std::uint32_t file_idx = peer.interests[rng_() % peer.interests.size()];
    const auto& file_id = catalog_[file_idx].meta.file_id;
    trace(t, "arrival", std::to_string(peer_idx), "-", to_hex(file_id), "");

    // Providers: the peer's own server plus peer-exchange discoveries.
    std::vector<std::uint32_t> candidates;
    for (std::size_t s = 0; s < servers_.size(); ++s) {
        auto it = servers_[s].providers.find(file_id);
        if (it == servers_[s].providers.end()) continue;
        for (std::uint32_t hp_idx : it->second) {
            if (s != peer.server && !(u01(rng_) < cfg_.peer_exchange_prob)) continue;
            const auto& hp = honeypots_[hp_idx];
            if (!hp.connected || hp.discover_at_us > t) continue;
            if (peer.active.count(hp_idx) != 0) continue;
            auto st = peer.standing.find(hp_idx);
            if (st != peer.standing.end() && st->second.listed) continue;
            if (peer.contacted.count(hp_idx) == 0 && honeypots_[hp_idx].bad_reports > 0) {
                double reports = static_cast<double>(honeypots_[hp_idx].bad_reports);
                double avoid = cfg_.gossip_max_avoid * reports / (reports + gossip_half_);
                if (u01(rng_) < avoid) continue;
            }
            candidates.push_back(hp_idx);
        }
    }
    if (candidates.empty()) {
        trace(t, "no_provider", std::to_string(peer_idx), "-", to_hex(file_id), "");
        return;
    }
    std::sort(candidates.begin(), candidates.end());

    std::size_t fanout = std::min<std::size_t>(
        candidates.size(), 1 + poisson_draw(rng_, cfg_.provider_fanout_mean - 1.0));
    for (std::size_t i = 0; i < fanout; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng_() % (candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
    }

    std::uint64_t session = sessions_;
    for (std::size_t i = 0; i < fanout; ++i) {
        std::uint32_t hp_idx = candidates[i];
        Contact contact;
        contact.peer = peer_idx;
        contact.honeypot = hp_idx;
        contact.file = file_idx;
        contact.session = session;
        contact.budget = draw_detection_threshold(cfg_.requests_per_contact_mean, rng_);
        contacts_.push_back(contact);
        peer.active.insert(hp_idx);
        std::int64_t jitter = static_cast<std::int64_t>(u01(rng_) * 2e6);
        push(t + jitter, Ev::Hello, static_cast<std::uint32_t>(contacts_.size() - 1));
    }
}

void Simulation::on_hello(std::int64_t t, std::uint32_t contact_idx) {
    auto& contact = contacts_[contact_idx];
    auto& peer = peers_[contact.peer];
    auto& hp = honeypots_[contact.honeypot];
    peer.contacted.insert(contact.honeypot);

    proto::Hello hello;
    hello.peer.user_id = peer.user_id;
    hello.peer.client_id = peer.client_id;
    hello.port = peer.port;
    hello.client_name = kClientNames[peer.name_idx];
    hello.client_version = peer.version;

    auto res = hp.engine.handle_peer_message(context_of(peer), hello, now_ms(t));
    record_logs(contact.honeypot, res.logs);
    trace(t, "hello", std::to_string(contact.peer), hp.spec.id,
          to_hex(catalog_[contact.file].meta.file_id), "s" + std::to_string(contact.session));

    bool asked = false;
    for (const auto& m : res.to_peer)
        if (std::get_if<proto::AskSharedList>(&m) != nullptr) asked = true;
    if (asked && u01(rng_) < cfg_.share_list_prob) {
        push(t + 150'000 + static_cast<std::int64_t>(u01(rng_) * 450'000), Ev::SharedList,
             contact_idx);
    }
    push(t + 200'000 + static_cast<std::int64_t>(u01(rng_) * 600'000), Ev::StartUpload, contact_idx);
}

void Simulation::on_shared_list(std::int64_t t, std::uint32_t contact_idx) {
    auto& contact = contacts_[contact_idx];
    auto& peer = peers_[contact.peer];
    auto& hp = honeypots_[contact.honeypot];

    proto::SharedListAnswer answer;
    answer.files.reserve(peer.shares.size());
    for (std::uint32_t f : peer.shares) answer.files.push_back(catalog_[f].meta);

    auto res = hp.engine.handle_peer_message(context_of(peer), answer, now_ms(t));
    register_files(contact.honeypot, res.observations);
    trace(t, "shared_list", std::to_string(contact.peer), hp.spec.id, "-",
          std::to_string(peer.shares.size()));
}

void Simulation::on_start_upload(std::int64_t t, std::uint32_t contact_idx) {
    auto& contact = contacts_[contact_idx];
    auto& peer = peers_[contact.peer];
    auto& hp = honeypots_[contact.honeypot];
    const auto& file_id = catalog_[contact.file].meta.file_id;

    auto res = hp.engine.handle_peer_message(context_of(peer), proto::StartUpload{file_id},
                                             now_ms(t));
    record_logs(contact.honeypot, res.logs);
    trace(t, "start_upload", std::to_string(contact.peer), hp.spec.id, to_hex(file_id),
          "s" + std::to_string(contact.session));

    bool accepted = false;
    for (const auto& m : res.to_peer)
        if (std::get_if<proto::AcceptUpload>(&m) != nullptr) accepted = true;
    if (!accepted) {
        end_contact(contact_idx, "refused", t);
        return;
    }
    trace(t, "accept_upload", std::to_string(contact.peer), hp.spec.id, to_hex(file_id), "");
    push(t + 100'000 + static_cast<std::int64_t>(u01(rng_) * 300'000), Ev::Request, contact_idx);
}

void Simulation::do_request(std::int64_t t, std::uint32_t contact_idx) {
    auto& contact = contacts_[contact_idx];
    auto& peer = peers_[contact.peer];
    auto& hp = honeypots_[contact.honeypot];
    const auto& meta = catalog_[contact.file].meta;

    if (contact.budget == 0) {
        end_contact(contact_idx, "budget", t);
        return;
    }
    --contact.budget;

    std::uint64_t remaining = meta.size > contact.next_offset ? meta.size - contact.next_offset : 0;
    if (remaining == 0) {
        contact.next_offset = 0;
        remaining = meta.size;
    }
    std::uint64_t want = (u01(rng_) < 0.9) ? 180 * 1024 : 300 * 1024;
    std::uint32_t len = static_cast<std::uint32_t>(std::min<std::uint64_t>(want, remaining));
    if (len == 0) len = 1;

    proto::RequestPart req;
    req.file_id = meta.file_id;
    req.ranges = {{contact.next_offset, len}};
    contact.next_offset += len;

    auto res = hp.engine.handle_peer_message(context_of(peer), req, now_ms(t));
    record_logs(contact.honeypot, res.logs);
    trace(t, "request_part", std::to_string(contact.peer), hp.spec.id, to_hex(meta.file_id),
          "s" + std::to_string(contact.session));

    contact.pending_parts = 0;
    for (const auto& m : res.to_peer)
        if (std::get_if<proto::SendPart>(&m) != nullptr) ++contact.pending_parts;
    contact.served = contact.pending_parts > 0;

    std::int64_t timeout_us = static_cast<std::int64_t>(cfg_.timeout_no_answer_s * 1e6);
    std::int64_t gap = next_request_gap_us(contact.served, timeout_us, cfg_.service_mean_s, rng_);
    push(t + gap, Ev::RequestDone, contact_idx);
}

void Simulation::on_request_done(std::int64_t t, std::uint32_t contact_idx) {
    auto& contact = contacts_[contact_idx];
    auto& peer = peers_[contact.peer];
    auto& hp = honeypots_[contact.honeypot];
    const auto& file_id = catalog_[contact.file].meta.file_id;

    auto& standing = peer.standing[contact.honeypot];
    bool listed = false;
    if (contact.served) {
        trace(t, "send_part", std::to_string(contact.peer), hp.spec.id, to_hex(file_id),
              std::to_string(contact.pending_parts));
        for (std::uint32_t p = 0; p < contact.pending_parts && !listed; ++p) {
            listed = blacklist_update(standing, Evidence::BadPart, cfg_.detect_random_content,
                                      cfg_.detect_no_content, rng_);
        }
    } else {
        trace(t, "silence", std::to_string(contact.peer), hp.spec.id, to_hex(file_id), "");
        listed = blacklist_update(standing, Evidence::Silence, cfg_.detect_random_content,
                                  cfg_.detect_no_content, rng_);
    }

    if (listed) {
        ++hp.bad_reports;
        trace(t, "blacklist", std::to_string(contact.peer), hp.spec.id, "-",
              contact.served ? "bad" : "silence");
        end_contact(contact_idx, "blacklist", t);
        return;
    }
    // Next request fires at exactly this instant; the inter-request gap is the
    // service delay (served) or the retry timeout (silence).
    do_request(t, contact_idx);
}

void Simulation::end_contact(std::uint32_t contact_idx, const char* why, std::int64_t t) {
    auto& contact = contacts_[contact_idx];
    if (contact.done) return;
    contact.done = true;
    peers_[contact.peer].active.erase(contact.honeypot);
    trace(t, "contact_end", std::to_string(contact.peer), honeypots_[contact.honeypot].spec.id,
          "-", why);
}

SimResult Simulation::run() {
    namespace fs = std::filesystem;
    SimResult result;
    fs::create_directories(out_dir_);

    duration_us_ = static_cast<std::int64_t>(cfg_.duration_s * 1e6);
    gossip_half_ = std::max(1.0, cfg_.gossip_half_frac * static_cast<double>(cfg_.n_peers));

    build_population();
    setup_honeypots();

    result.trace_path = (fs::path(out_dir_) / "trace.csv").string();
    trace_.open(result.trace_path, std::ios::binary);
    trace_ << "time,event,peer,honeypot,file,detail\n";

    for (std::size_t i = 0; i < honeypots_.size(); ++i) {
        push(50'000 + static_cast<std::int64_t>(i) * 137'000, Ev::Connect,
             static_cast<std::uint32_t>(i));
    }
    if (cfg_.n_peers > 0 && cfg_.sessions_per_peer_per_day > 0) {
        push(1000, Ev::Arrival, 0);
    }

    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        ++events_;
        switch (ev.kind) {
            case Ev::Arrival: on_arrival(ev.t); break;
            case Ev::Connect: on_connect(ev.t, ev.target); break;
            case Ev::Tick: on_tick(ev.t, ev.target); break;
            case Ev::Hello: on_hello(ev.t, ev.target); break;
            case Ev::SharedList: on_shared_list(ev.t, ev.target); break;
            case Ev::StartUpload: on_start_upload(ev.t, ev.target); break;
            case Ev::Request: do_request(ev.t, ev.target); break;
            case Ev::RequestDone: on_request_done(ev.t, ev.target); break;
        }
    }
    trace_.close();

    // Step-1 logs and file observations per honeypot, then the manager merge.
    std::vector<std::string> log_paths;
    std::vector<std::string> files_paths;
    for (auto& hp : honeypots_) {
        auto log_path = (fs::path(out_dir_) / (hp.spec.id + ".log")).string();
        {
            auto sink = std::make_shared<FileLogSink>(log_path, hp.spec.id);
            RecordWriter writer(sink);
            for (const auto& rec : hp.logs) writer.append(rec);
            sink->flush();
        }
        log_paths.push_back(log_path);

        auto files_path = (fs::path(out_dir_) / (hp.spec.id + ".files")).string();
        {
            auto sink = std::make_shared<FileLogSink>(files_path, hp.spec.id, kFilesMagic);
            for (const auto& row : hp.obs_rows) sink->append_line(manager::format_file_row(row));
            sink->flush();
        }
        files_paths.push_back(files_path);

        if (hp.connected)
            ++result.honeypots_connected;
        else
            ++result.honeypots_failed;
    }

    result.unified_path = (fs::path(out_dir_) / "unified.log").string();
    result.merge = manager::merge_log_files(log_paths, result.unified_path);

    result.files_path = (fs::path(out_dir_) / "files.tsv").string();
    manager::merge_file_sidecars(files_paths, plan_.filename_threshold, result.files_path);

    result.plan_path = (fs::path(out_dir_) / "plan.cfg").string();
    plan::save_plan(plan_, result.plan_path);

    result.status_path = (fs::path(out_dir_) / "status.tsv").string();
    {
        std::ofstream status(result.status_path, std::ios::binary);
        status << "honeypot_id\tconnected\tclient_id\tid_status\n";
        for (const auto& hp : honeypots_) {
            auto st = hp.engine.status(now_ms(duration_us_));
            status << hp.spec.id << '\t' << (st.connected ? 1 : 0) << '\t'
                   << (st.client_id ? std::to_string(*st.client_id) : "-") << '\t'
                   << (st.connected ? proto::to_string(st.id_status) : "-") << '\n';
        }
    }

    result.events = events_;
    result.trace_rows = trace_rows_;
    result.sessions = sessions_;
    return result;
}

}  // namespace

SimResult run_simulation(const SimConfig& cfg, const plan::DeploymentPlan& dp,
                         const std::string& out_dir) {
    std::string cfg_err = validate(cfg);
    if (!cfg_err.empty()) throw std::invalid_argument("sim config: " + cfg_err);
    std::string plan_err = plan::validate(dp);
    if (!plan_err.empty()) throw std::invalid_argument("plan: " + plan_err);
    Simulation sim(cfg, dp, out_dir);
    return sim.run();
}

}  // namespace hnl::sim
