// SPDX-License-Identifier: Apache-2.0
#include "hnl/runtime.hpp"

#include "hnl/diag.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

namespace hnl::runtime {

namespace fs = std::filesystem;

std::int64_t wall_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

LiveHoneypot::LiveHoneypot(LiveHoneypotOptions opts) : opts_(std::move(opts)) {
    server_target_ = opts_.engine.server;
}

LiveHoneypot::~LiveHoneypot() { stop(); }

bool LiveHoneypot::start() {
    fs::create_directories(opts_.out_dir);
    log_path_ = (fs::path(opts_.out_dir) / (opts_.engine.honeypot_id + ".log")).string();
    files_path_ = (fs::path(opts_.out_dir) / (opts_.engine.honeypot_id + ".files")).string();

    log_sink_ = std::make_shared<FileLogSink>(log_path_, opts_.engine.honeypot_id);
    files_sink_ = std::make_shared<FileLogSink>(files_path_, opts_.engine.honeypot_id, kFilesMagic);
    if (!log_sink_->ok() || !files_sink_->ok()) return false;
    writer_ = std::make_unique<RecordWriter>(log_sink_);
    engine_ = std::make_unique<honeypot::Engine>(opts_.engine);

    auto listener = net::Listener::bind_any(opts_.listen_port);
    if (!listener) return false;
    peer_listener_ = std::move(*listener);

    if (opts_.control) {
        auto ctl = net::Listener::bind_any(opts_.control_port);
        if (!ctl) return false;
        control_listener_ = std::move(*ctl);
    }

    {
        std::lock_guard<std::mutex> lock(mutex_);
        std::vector<honeypot::FileObservation> obs;
        engine_->advertise(opts_.advertise, wall_ms(), obs);
        note_observations(obs);
    }

    stopping_.store(false);
    running_.store(true);
    server_thread_ = std::thread([this] { server_loop(); });
    peer_thread_ = std::thread([this] { peer_loop(); });
    if (control_listener_.valid()) control_thread_ = std::thread([this] { control_loop(); });
    return true;
}

void LiveHoneypot::stop() {
    if (!running_.exchange(false)) return;
    stopping_.store(true);
    peer_listener_.close_now();
    control_listener_.close_now();
    if (server_thread_.joinable()) server_thread_.join();
    if (peer_thread_.joinable()) peer_thread_.join();
    if (control_thread_.joinable()) control_thread_.join();
    for (auto& t : peer_sessions_)
        if (t.joinable()) t.join();
    peer_sessions_.clear();
    flush();
}

void LiveHoneypot::flush() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (writer_) writer_->flush();
    if (log_sink_) log_sink_->flush();
    if (files_sink_) files_sink_->flush();
}

void LiveHoneypot::note_observations(const std::vector<honeypot::FileObservation>& obs) {
    for (const auto& o : obs) {
        auto key = std::make_pair(static_cast<std::uint8_t>(o.source), o.meta.file_id);
        if (!obs_seen_.insert(key).second) continue;
        manager::FileRow row{opts_.engine.honeypot_id, o.source, o.meta.file_id, o.meta.size,
                             o.meta.name};
        files_sink_->append_line(manager::format_file_row(row));
    }
}

std::uint16_t LiveHoneypot::peer_port() const { return peer_listener_.port(); }
std::uint16_t LiveHoneypot::control_port() const { return control_listener_.port(); }

manager::HoneypotStatus LiveHoneypot::status() const {
    std::lock_guard<std::mutex> lock(mutex_);
    manager::HoneypotStatus st;
    st.honeypot_id = opts_.engine.honeypot_id;
    st.last_seen_ms = wall_ms();
    if (engine_) {
        auto s = engine_->status(st.last_seen_ms);
        st.connected = s.connected;
        st.client_id = s.client_id;
        st.id_status = s.id_status;
    }
    return st;
}

control::StatusRep LiveHoneypot::control_status() const {
    std::lock_guard<std::mutex> lock(mutex_);
    control::StatusRep rep;
    rep.honeypot_id = opts_.engine.honeypot_id;
    if (engine_) {
        auto s = engine_->status(wall_ms());
        rep.connected = s.connected;
        rep.client_id = s.client_id;
    }
    if (writer_) {
        rep.records = writer_->stats().written;
        rep.dropped = writer_->stats().dropped;
    }
    return rep;
}

void LiveHoneypot::redirect(const honeypot::ServerInfo& server) {
    std::lock_guard<std::mutex> lock(mutex_);
    server_target_ = server;
    reconnect_requested_ = true;
}

void LiveHoneypot::server_loop() {
    std::int64_t last_tick = 0;
    while (!stopping_.load()) {
        honeypot::ServerInfo target;
        bool want_reconnect = false;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            target = server_target_;
            want_reconnect = reconnect_requested_;
            reconnect_requested_ = false;
        }
        if (want_reconnect && server_sock_) {
            server_sock_->shutdown_close();
            server_sock_.reset();
            std::lock_guard<std::mutex> lock(mutex_);
            engine_->on_disconnected(wall_ms());
        }

        if (!server_sock_) {
            auto sock = net::FramedSocket::connect(target.host, target.port, 1500);
            if (sock) {
                proto::Hello hello;
                hello.client_name = opts_.engine.honeypot_id;
                hello.port = peer_listener_.port();
                bool ok = sock->send_bytes(proto::encode_message(hello));
                std::optional<std::vector<std::uint8_t>> reply;
                if (ok) reply = sock->recv_frame(1500);
                std::uint32_t client_id = 0;
                bool connected = false;
                if (reply) {
                    auto decoded = proto::decode_message(*reply);
                    if (decoded.ok()) {
                        if (const auto* answer =
                                std::get_if<proto::HelloAnswer>(&*decoded.message)) {
                            client_id = answer->peer.client_id;
                            connected = true;
                        }
                    }
                }
                if (connected) {
                    server_sock_ = std::move(sock);
                    std::lock_guard<std::mutex> lock(mutex_);
                    engine_->on_connect_result(true, client_id, wall_ms());
                } else {
                    std::lock_guard<std::mutex> lock(mutex_);
                    engine_->on_connect_result(false, 0, wall_ms());
                }
            } else {
                std::lock_guard<std::mutex> lock(mutex_);
                engine_->on_connect_result(false, 0, wall_ms());
            }
            if (!server_sock_) {
                auto deadline = std::chrono::steady_clock::now() +
                                std::chrono::milliseconds(
                                    static_cast<int>(opts_.connect_retry_s * 1000));
                while (!stopping_.load() && std::chrono::steady_clock::now() < deadline)
                    std::this_thread::sleep_for(std::chrono::milliseconds(20));
                continue;
            }
        }

        // Keep-alive offers ride the engine's own clock.
        std::int64_t now = wall_ms();
        if (now - last_tick >= 250) {
            last_tick = now;
            std::vector<proto::Message> to_server;
            {
                std::lock_guard<std::mutex> lock(mutex_);
                to_server = engine_->tick(now);
            }
            for (const auto& msg : to_server) {
                if (!server_sock_->send_bytes(proto::encode_message(msg))) {
                    std::lock_guard<std::mutex> lock(mutex_);
                    engine_->on_disconnected(wall_ms());
                    server_sock_.reset();
                    break;
                }
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

void LiveHoneypot::peer_loop() {
    while (!stopping_.load()) {
        auto sock = peer_listener_.accept(200);
        if (!sock) continue;
        std::lock_guard<std::mutex> lock(sessions_mutex_);
        peer_sessions_.emplace_back(
            [this, s = std::move(*sock)]() mutable { serve_peer(std::move(s)); });
    }
}

void LiveHoneypot::serve_peer(net::FramedSocket sock) {
    honeypot::PeerContext ctx;
    ctx.address.ip = sock.peer_ip();
    ctx.address.port = sock.peer_port();
    while (!stopping_.load()) {
        bool closed = false;
        auto frame = sock.recv_frame(250, &closed);
        if (!frame) {
            if (closed) break;
            continue;
        }
        auto decoded = proto::decode_message(*frame);
        if (!decoded.ok()) continue;  // junk from a peer is not fatal
        if (const auto* hello = std::get_if<proto::Hello>(&*decoded.message)) {
            ctx.user = hello->peer.user_id;
        }
        honeypot::HandleResult res;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            res = engine_->handle_peer_message(ctx, *decoded.message, wall_ms());
            for (const auto& rec : res.logs) writer_->append(rec);
            note_observations(res.observations);
        }
        for (const auto& msg : res.to_peer) {
            if (!sock.send_bytes(proto::encode_message(msg))) break;
        }
    }
}

void LiveHoneypot::control_loop() {
    while (!stopping_.load()) {
        auto sock = control_listener_.accept(200);
        if (!sock) continue;
        serve_control(std::move(*sock));
    }
}

void LiveHoneypot::serve_control(net::FramedSocket sock) {
    while (!stopping_.load()) {
        bool closed = false;
        auto frame = sock.recv_frame(250, &closed);
        if (!frame) {
            if (closed) break;
            continue;
        }
        auto decoded = control::decode_control(*frame);
        if (!decoded.ok()) continue;

        if (std::get_if<control::StatusReq>(&*decoded.message) != nullptr) {
            sock.send_bytes(control::encode_control(control_status()));
        } else if (const auto* start = std::get_if<control::StartReq>(&*decoded.message)) {
            redirect(start->server);
            sock.send_bytes(control::encode_control(control::StartRep{true}));
        } else if (const auto* adv = std::get_if<control::AdvertiseReq>(&*decoded.message)) {
            std::uint32_t count = 0;
            {
                std::lock_guard<std::mutex> lock(mutex_);
                std::vector<honeypot::FileObservation> obs;
                engine_->advertise(adv->files, wall_ms(), obs);
                note_observations(obs);
                count = static_cast<std::uint32_t>(engine_->shared_files().size());
            }
            sock.send_bytes(control::encode_control(control::AdvertiseRep{count}));
        } else if (std::get_if<control::ShipLogsReq>(&*decoded.message) != nullptr) {
            flush();
            for (std::uint8_t stream = 0; stream <= 1; ++stream) {
                std::ifstream in(stream == 0 ? log_path_ : files_path_, std::ios::binary);
                std::vector<std::uint8_t> chunk(control::kShipChunkMax);
                while (in) {
                    in.read(reinterpret_cast<char*>(chunk.data()),
                            static_cast<std::streamsize>(chunk.size()));
                    std::streamsize got = in.gcount();
                    if (got <= 0) break;
                    control::ShipLogsRep rep;
                    rep.stream = stream;
                    rep.more = in.peek() != std::ifstream::traits_type::eof();
                    rep.chunk.assign(chunk.begin(), chunk.begin() + got);
                    sock.send_bytes(control::encode_control(rep));
                }
            }
            control::ShipLogsRep done;
            done.stream = 0xFF;
            done.more = false;
            sock.send_bytes(control::encode_control(done));
        } else if (std::get_if<control::StopReq>(&*decoded.message) != nullptr) {
            sock.send_bytes(control::encode_control(control::StopRep{}));
            stopping_.store(true);
            break;
        }
    }
}

// --- LiveManager ----------------------------------------------------------------

LiveManager::LiveManager(LiveManagerOptions opts) : opts_(std::move(opts)) {}

LiveManager::~LiveManager() {
    for (auto& hp : honeypots_)
        if (hp) hp->stop();
    if (embedded_) embedded_->stop();
}

LiveManagerResult LiveManager::run() {
    LiveManagerResult result;
    fs::create_directories(opts_.out_dir);

    if (opts_.plan.embedded_server_port != 0) {
        net::MiniServer::Options srv;
        srv.port = opts_.plan.embedded_server_port;
        embedded_ = std::make_unique<net::MiniServer>(srv);
        if (!embedded_->start()) {
            diag::error("embedded server failed to bind; honeypots will stay disconnected");
        }
    }

    anonymize::Salt salt =
        opts_.seed != 0 ? anonymize::salt_from_seed(opts_.seed) : anonymize::random_salt();

    for (std::size_t i = 0; i < opts_.plan.honeypots.size(); ++i) {
        const auto& spec = opts_.plan.honeypots[i];
        LiveHoneypotOptions hp_opts;
        hp_opts.engine.honeypot_id = spec.id;
        hp_opts.engine.server = spec.server;
        hp_opts.engine.strategy = spec.strategy;
        hp_opts.engine.greedy.enabled = spec.greedy;
        hp_opts.engine.greedy.accretion_deadline_ms =
            wall_ms() + static_cast<std::int64_t>(spec.greedy_window_h * 3.6e6);
        hp_opts.engine.salt = salt;
        hp_opts.engine.content_seed = opts_.seed ^ (0x9E3779B9ULL * (i + 1));
        hp_opts.listen_port = spec.listen_port;
        hp_opts.out_dir = opts_.out_dir;
        auto it = opts_.plan.advertisements.find(spec.id);
        if (it != opts_.plan.advertisements.end()) hp_opts.advertise = it->second;

        auto hp = std::make_unique<LiveHoneypot>(std::move(hp_opts));
        if (hp->start()) {
            ++result.launch.started;
            honeypots_.push_back(std::move(hp));
        } else {
            ++result.launch.failed;
            diag::error("honeypot " + spec.id + " failed to start");
            honeypots_.push_back(nullptr);
        }
    }

    manager::SupervisorConfig sup_cfg;
    sup_cfg.poll_interval_s = opts_.plan.poll_interval_s;
    sup_cfg.server_pool = opts_.plan.server_pool;
    manager::Supervisor supervisor(sup_cfg);

    result.status_path = (fs::path(opts_.out_dir) / "status.tsv").string();
    auto poll_once = [&] {
        std::vector<manager::HoneypotStatus> statuses;
        for (std::size_t i = 0; i < honeypots_.size(); ++i) {
            if (!honeypots_[i]) continue;
            statuses.push_back(honeypots_[i]->status());
        }
        auto actions = supervisor.supervise(statuses, wall_ms());
        for (const auto& act : actions) {
            if (act.kind != manager::SupervisorAction::Kind::Restart) continue;
            for (auto& hp : honeypots_) {
                if (hp && hp->status().honeypot_id == act.honeypot_id && !act.server.host.empty())
                    hp->redirect(act.server);
            }
        }
        std::ofstream status_out(result.status_path, std::ios::binary);
        status_out << "honeypot_id\tconnected\tclient_id\tid_status\n";
        for (const auto& st : statuses) {
            status_out << st.honeypot_id << '\t' << (st.connected ? 1 : 0) << '\t'
                       << (st.client_id ? std::to_string(*st.client_id) : "-") << '\t'
                       << (st.client_id ? proto::to_string(st.id_status) : "-") << '\n';
        }
        return statuses;
    };

    auto start = std::chrono::steady_clock::now();
    auto poll_ms = std::chrono::milliseconds(
        std::max(10, static_cast<int>(opts_.plan.poll_interval_s * 1000)));
    while (!stopping_.load()) {
        result.launch.statuses = poll_once();
        if (opts_.duration_s > 0 &&
            std::chrono::steady_clock::now() - start >
                std::chrono::milliseconds(static_cast<int>(opts_.duration_s * 1000))) {
            break;
        }
        auto slept = std::chrono::milliseconds(0);
        while (!stopping_.load() && slept < poll_ms) {
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
            slept += std::chrono::milliseconds(10);
        }
    }
    result.launch.statuses = poll_once();

    // Gather: stop honeypots, then merge their logs and sidecars.
    std::vector<std::string> log_paths;
    std::vector<std::string> files_paths;
    for (auto& hp : honeypots_) {
        if (!hp) continue;
        hp->stop();
        log_paths.push_back(hp->log_path());
        files_paths.push_back(hp->files_path());
    }
    if (embedded_) embedded_->stop();

    result.unified_path = (fs::path(opts_.out_dir) / "unified.log").string();
    result.merge = manager::merge_log_files(log_paths, result.unified_path);
    result.files_path = (fs::path(opts_.out_dir) / "files.tsv").string();
    manager::merge_file_sidecars(files_paths, opts_.plan.filename_threshold, result.files_path);
    return result;
}

}  // namespace hnl::runtime
