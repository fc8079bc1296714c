// SPDX-License-Identifier: Apache-2.0
// Blocking framed-TCP primitives for the socket-backed mode, plus a
// desk-scale indexing server. Real measurement runs use the simulator; this
// layer exists so the honeypot/manager stack can be exercised end to end over
// loopback sockets.
#pragma once

#include "hnl/protocol.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hnl::net {

inline constexpr std::size_t kMaxFrameBytes = 32u << 20;

class FramedSocket {
public:
    FramedSocket() = default;
    explicit FramedSocket(int fd);
    FramedSocket(FramedSocket&& other) noexcept;
    FramedSocket& operator=(FramedSocket&& other) noexcept;
    FramedSocket(const FramedSocket&) = delete;
    FramedSocket& operator=(const FramedSocket&) = delete;
    ~FramedSocket();

    static std::optional<FramedSocket> connect(const std::string& host, std::uint16_t port,
                                               int timeout_ms = 3000);

    bool valid() const { return fd_ >= 0; }
    bool send_bytes(const std::vector<std::uint8_t>& bytes);

    // One complete frame, header included; nullopt on EOF, error or timeout.
    // `closed`, when given, is set if the connection is gone (not a timeout).
    std::optional<std::vector<std::uint8_t>> recv_frame(int timeout_ms = 5000,
                                                        bool* closed = nullptr);

    std::uint32_t peer_ip() const { return peer_ip_; }
    std::uint16_t peer_port() const { return peer_port_; }
    void shutdown_close();

private:
    int fd_ = -1;
    std::uint32_t peer_ip_ = 0;
    std::uint16_t peer_port_ = 0;
};

class Listener {
public:
    Listener() = default;
    Listener(Listener&& other) noexcept;
    Listener& operator=(Listener&& other) noexcept;
    Listener(const Listener&) = delete;
    ~Listener();

    // port 0 binds an ephemeral port.
    static std::optional<Listener> bind_any(std::uint16_t port);

    std::uint16_t port() const { return port_; }
    bool valid() const { return fd_ >= 0; }
    std::optional<FramedSocket> accept(int timeout_ms);
    void close_now();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

// Minimal indexing server: assigns client ids on HELLO and records
// OFFER-FILES provider lists. Enough server for honeypots to connect to in
// integration tests and desk demos.
class MiniServer {
public:
    struct Options {
        std::uint16_t port = 0;  // 0 = ephemeral
        std::string name = "mini";
        // 0 = assign sequential high ids; otherwise every client gets this id.
        std::uint32_t forced_client_id = 0;
    };

    explicit MiniServer(Options opts);
    ~MiniServer();

    bool start();
    void stop();
    bool running() const;
    std::uint16_t port() const;

    std::size_t session_count() const;
    std::map<proto::FileId, std::size_t> provider_counts() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hnl::net
