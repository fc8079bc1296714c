// SPDX-License-Identifier: Apache-2.0
// Socket-backed runtime: a honeypot serving real TCP peers with a control
// channel, and a manager that launches in-process honeypots, supervises them,
// and gathers + merges their logs.
#pragma once

#include "hnl/control.hpp"
#include "hnl/honeypot.hpp"
#include "hnl/manager.hpp"
#include "hnl/net.hpp"
#include "hnl/plan.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace hnl::runtime {

std::int64_t wall_ms();

struct LiveHoneypotOptions {
    honeypot::EngineConfig engine;
    std::vector<proto::FileMeta> advertise;
    std::uint16_t listen_port = 0;  // peer-facing; 0 = ephemeral
    bool control = false;           // expose the manager control channel
    std::uint16_t control_port = 0;  // 0 = ephemeral
    std::string out_dir;
    double connect_retry_s = 2.0;
};

// One honeypot: a server-connection thread (connect, HELLO handshake,
// keep-alive offers), a peer listener, and an optional control listener.
// Engine calls and log appends are serialized through one mutex, which gives
// the per-honeypot total order of records.
class LiveHoneypot {
public:
    explicit LiveHoneypot(LiveHoneypotOptions opts);
    ~LiveHoneypot();

    bool start();
    void stop();
    bool running() const { return running_.load(); }
    // Set when a control-channel Stop arrived; the owner should then stop().
    bool stop_requested() const { return stopping_.load(); }

    manager::HoneypotStatus status() const;
    control::StatusRep control_status() const;
    std::uint16_t peer_port() const;
    std::uint16_t control_port() const;
    const std::string& log_path() const { return log_path_; }
    const std::string& files_path() const { return files_path_; }

    // Redirect to another server (used by supervisor restarts).
    void redirect(const honeypot::ServerInfo& server);
    void flush();

private:
    void server_loop();
    void peer_loop();
    void control_loop();
    void serve_peer(net::FramedSocket sock);
    void serve_control(net::FramedSocket sock);
    void note_observations(const std::vector<honeypot::FileObservation>& obs);

    LiveHoneypotOptions opts_;
    std::unique_ptr<honeypot::Engine> engine_;
    mutable std::mutex mutex_;  // engine + writer + sidecar
    std::shared_ptr<FileLogSink> log_sink_;
    std::unique_ptr<RecordWriter> writer_;
    std::shared_ptr<FileLogSink> files_sink_;
    std::set<std::pair<std::uint8_t, proto::FileId>> obs_seen_;
    std::string log_path_;
    std::string files_path_;

    net::Listener peer_listener_;
    net::Listener control_listener_;
    std::optional<net::FramedSocket> server_sock_;
    honeypot::ServerInfo server_target_;
    bool reconnect_requested_ = false;

    std::atomic<bool> running_{false};
    std::atomic<bool> stopping_{false};
    std::thread server_thread_;
    std::thread peer_thread_;
    std::thread control_thread_;
    std::vector<std::thread> peer_sessions_;
    std::mutex sessions_mutex_;
};

struct LaunchReport {
    std::size_t started = 0;
    std::size_t failed = 0;
    std::vector<manager::HoneypotStatus> statuses;
};

struct LiveManagerOptions {
    plan::DeploymentPlan plan;
    std::string out_dir;
    double duration_s = 0.0;  // 0 = run until stop() is called
    std::uint64_t seed = 0;   // 0 = random campaign salt
};

struct LiveManagerResult {
    LaunchReport launch;
    manager::MergeStats merge;
    std::string unified_path;
    std::string files_path;
    std::string status_path;
};

// Launches every honeypot in the plan (in process), polls and supervises
// them, then gathers logs and produces the unified dataset. Blocking;
// stop() from another thread ends the run early.
class LiveManager {
public:
    explicit LiveManager(LiveManagerOptions opts);
    ~LiveManager();

    LiveManagerResult run();
    void stop() { stopping_.store(true); }

private:
    LiveManagerOptions opts_;
    std::atomic<bool> stopping_{false};
    std::vector<std::unique_ptr<LiveHoneypot>> honeypots_;
    std::unique_ptr<net::MiniServer> embedded_;
};

}  // namespace hnl::runtime
