// SPDX-License-Identifier: Apache-2.0
#include "hnl/net.hpp"

#include "hnl/diag.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <mutex>
#include <thread>

namespace hnl::net {

namespace {

bool wait_readable(int fd, int timeout_ms) {
    pollfd pfd{fd, POLLIN, 0};
    int rc = ::poll(&pfd, 1, timeout_ms);
    return rc > 0 && (pfd.revents & (POLLIN | POLLHUP)) != 0;
}

enum class ReadStatus { Ok, Timeout, Closed };

ReadStatus read_exact(int fd, std::uint8_t* out, std::size_t len, int timeout_ms) {
    std::size_t got = 0;
    while (got < len) {
        if (!wait_readable(fd, timeout_ms)) {
            // A partially read frame that stalls counts as a broken peer.
            return got == 0 ? ReadStatus::Timeout : ReadStatus::Closed;
        }
        ssize_t n = ::recv(fd, out + got, len - got, 0);
        if (n <= 0) return ReadStatus::Closed;
        got += static_cast<std::size_t>(n);
    }
    return ReadStatus::Ok;
}

}  // namespace

FramedSocket::FramedSocket(int fd) : fd_(fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getpeername(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
        peer_ip_ = ntohl(addr.sin_addr.s_addr);
        peer_port_ = ntohs(addr.sin_port);
    }
}

FramedSocket::FramedSocket(FramedSocket&& other) noexcept
    : fd_(other.fd_), peer_ip_(other.peer_ip_), peer_port_(other.peer_port_) {
    other.fd_ = -1;
}

FramedSocket& FramedSocket::operator=(FramedSocket&& other) noexcept {
    if (this != &other) {
        shutdown_close();
        fd_ = other.fd_;
        peer_ip_ = other.peer_ip_;
        peer_port_ = other.peer_port_;
        other.fd_ = -1;
    }
    return *this;
}

FramedSocket::~FramedSocket() { shutdown_close(); }

void FramedSocket::shutdown_close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

std::optional<FramedSocket> FramedSocket::connect(const std::string& host, std::uint16_t port,
                                                  int timeout_ms) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &found) != 0 ||
        found == nullptr) {
        return std::nullopt;
    }
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
        ::freeaddrinfo(found);
        return std::nullopt;
    }
    int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, found->ai_addr, found->ai_addrlen);
    ::freeaddrinfo(found);
    if (rc != 0 && errno != EINPROGRESS) {
        ::close(fd);
        return std::nullopt;
    }
    if (rc != 0) {
        pollfd pfd{fd, POLLOUT, 0};
        if (::poll(&pfd, 1, timeout_ms) <= 0) {
            ::close(fd);
            return std::nullopt;
        }
        int err = 0;
        socklen_t len = sizeof err;
        if (::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) != 0 || err != 0) {
            ::close(fd);
            return std::nullopt;
        }
    }
    ::fcntl(fd, F_SETFL, flags);
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return FramedSocket(fd);
}

bool FramedSocket::send_bytes(const std::vector<std::uint8_t>& bytes) {
    if (fd_ < 0) return false;
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

std::optional<std::vector<std::uint8_t>> FramedSocket::recv_frame(int timeout_ms, bool* closed) {
    auto fail = [&](bool is_closed) {
        if (closed != nullptr) *closed = is_closed;
        return std::nullopt;
    };
    if (closed != nullptr) *closed = false;
    if (fd_ < 0) return fail(true);
    std::uint8_t header[5];
    auto st = read_exact(fd_, header, sizeof header, timeout_ms);
    if (st != ReadStatus::Ok) return fail(st == ReadStatus::Closed);
    // Garbage in the stream position leaves no way to resync; drop the peer.
    if (header[0] != proto::kFrameMagic) return fail(true);
    std::uint32_t n = 0;
    for (int i = 3; i >= 0; --i) n = (n << 8) | header[1 + i];
    if (n == 0 || n > kMaxFrameBytes) return fail(true);
    std::vector<std::uint8_t> frame(5 + n);
    std::memcpy(frame.data(), header, sizeof header);
    if (read_exact(fd_, frame.data() + 5, n, timeout_ms) != ReadStatus::Ok) return fail(true);
    return frame;
}

Listener::Listener(Listener&& other) noexcept : fd_(other.fd_), port_(other.port_) {
    other.fd_ = -1;
}

Listener& Listener::operator=(Listener&& other) noexcept {
    if (this != &other) {
        close_now();
        fd_ = other.fd_;
        port_ = other.port_;
        other.fd_ = -1;
    }
    return *this;
}

Listener::~Listener() { close_now(); }

void Listener::close_now() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::optional<Listener> Listener::bind_any(std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return std::nullopt;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 64) != 0) {
        ::close(fd);
        return std::nullopt;
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    Listener listener;
    listener.fd_ = fd;
    listener.port_ = ntohs(addr.sin_port);
    return listener;
}

std::optional<FramedSocket> Listener::accept(int timeout_ms) {
    if (fd_ < 0 || !wait_readable(fd_, timeout_ms)) return std::nullopt;
    int client = ::accept(fd_, nullptr, nullptr);
    if (client < 0) return std::nullopt;
    int one = 1;
    ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return FramedSocket(client);
}

// --- MiniServer ---------------------------------------------------------------

struct MiniServer::Impl {
    Options opts;
    Listener listener;
    std::thread accept_thread;
    std::vector<std::thread> sessions;
    std::atomic<bool> stop{false};
    std::atomic<std::uint32_t> next_id{1u << 25};
    mutable std::mutex mutex;
    std::map<proto::FileId, std::size_t> providers;
    std::size_t session_count = 0;

    void serve(FramedSocket sock) {
        std::map<proto::FileId, bool> own;
        while (!stop.load()) {
            bool closed = false;
            auto frame = sock.recv_frame(250, &closed);
            if (!frame) {
                if (closed || stop.load()) break;
                continue;
            }
            auto decoded = proto::decode_message(*frame);
            if (!decoded.ok()) continue;
            if (const auto* hello = std::get_if<proto::Hello>(&*decoded.message)) {
                proto::HelloAnswer answer;
                answer.peer.client_id =
                    opts.forced_client_id != 0 ? opts.forced_client_id : next_id.fetch_add(1);
                answer.client_name = opts.name;
                answer.client_version = 1;
                (void)hello;
                sock.send_bytes(proto::encode_message(answer));
            } else if (const auto* offer = std::get_if<proto::OfferFiles>(&*decoded.message)) {
                std::lock_guard<std::mutex> lock(mutex);
                for (const auto& f : offer->files) {
                    if (!own[f.file_id]) {
                        own[f.file_id] = true;
                        providers[f.file_id]++;
                    }
                }
            }
        }
    }
};

MiniServer::MiniServer(Options opts) : impl_(std::make_unique<Impl>()) { impl_->opts = opts; }

MiniServer::~MiniServer() { stop(); }

bool MiniServer::start() {
    auto listener = Listener::bind_any(impl_->opts.port);
    if (!listener) return false;
    impl_->listener = std::move(*listener);
    impl_->stop.store(false);
    impl_->accept_thread = std::thread([this] {
        while (!impl_->stop.load()) {
            auto sock = impl_->listener.accept(200);
            if (!sock) continue;
            std::lock_guard<std::mutex> lock(impl_->mutex);
            ++impl_->session_count;
            impl_->sessions.emplace_back(
                [this, s = std::move(*sock)]() mutable { impl_->serve(std::move(s)); });
        }
    });
    return true;
}

void MiniServer::stop() {
    if (!impl_ || impl_->stop.exchange(true)) return;
    impl_->listener.close_now();
    if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
    for (auto& t : impl_->sessions)
        if (t.joinable()) t.join();
    impl_->sessions.clear();
}

bool MiniServer::running() const { return impl_ && !impl_->stop.load(); }

std::uint16_t MiniServer::port() const { return impl_->listener.port(); }

std::size_t MiniServer::session_count() const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    return impl_->session_count;
}

std::map<proto::FileId, std::size_t> MiniServer::provider_counts() const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    return impl_->providers;
}

}  // namespace hnl::net
