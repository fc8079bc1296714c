// SPDX-License-Identifier: Apache-2.0
// Honeypot engine: a fake peer that advertises files, walks the upload
// exchange with downloaders up to (but excluding) delivery of real content,
// retrieves peers' shared lists, and logs every query it receives.
//
// The engine is a pure state machine over (message, now); all I/O lives in
// the callers (live socket runtime or the simulator).
#pragma once

#include "hnl/anonymize.hpp"
#include "hnl/logrec.hpp"
#include "hnl/protocol.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hnl::honeypot {

enum class Strategy : std::uint8_t { NoContent, RandomContent };

const char* to_string(Strategy s);
std::optional<Strategy> strategy_from(std::string_view s);

enum class PhaseKind : std::uint8_t { None, Greeted, UploadAccepted };

struct PeerPhase {
    PhaseKind kind = PhaseKind::None;
    proto::FileId file{};  // meaningful in UploadAccepted only
};

struct ServerInfo {
    std::string name;
    std::string host;
    std::uint16_t port = 4661;

    bool operator==(const ServerInfo&) const = default;
};

struct GreedyConfig {
    bool enabled = false;
    std::int64_t accretion_deadline_ms = 0;  // shared list frozen from here on
};

inline constexpr std::uint32_t kDefaultMaxChunk = 180 * 1024;
inline constexpr std::int64_t kDefaultOfferKeepaliveMs = 240'000;

struct EngineConfig {
    std::string honeypot_id;
    ServerInfo server;
    Strategy strategy = Strategy::NoContent;
    GreedyConfig greedy;
    anonymize::Salt salt{};
    std::uint64_t content_seed = 0;
    std::uint32_t max_chunk = kDefaultMaxChunk;
    std::int64_t offer_keepalive_ms = kDefaultOfferKeepaliveMs;
    // Sim runs skip filling SendPart payloads; lengths and message flow are
    // unchanged. Live mode always materializes.
    bool materialize_content = true;
};

struct PeerAddress {
    std::uint32_t ip = 0;
    std::uint16_t port = 0;
};

// Who a message is from: the transport address plus the identity the peer
// announced in its HELLO on this connection (all zeros before that).
struct PeerContext {
    PeerAddress address;
    proto::UserId user{};
};

// Row of the per-honeypot file observation sidecar (<id>.files): the
// honeypot's own advertised files plus files seen in peers' shared lists.
struct FileObservation {
    enum class Source : std::uint8_t { Advertised, PeerShared };
    Source source = Source::Advertised;
    proto::FileMeta meta;
};

const char* to_string(FileObservation::Source s);

struct StatusReport {
    std::string honeypot_id;
    bool connected = false;
    std::optional<std::uint32_t> client_id;
    proto::IdStatus id_status = proto::IdStatus::Low;
    std::int64_t at_ms = 0;
};

struct HandleResult {
    std::vector<proto::Message> to_peer;
    std::vector<LogRecord> logs;
    std::vector<FileObservation> observations;
    bool offer_files_changed = false;
};

// NoContent answers nothing; RandomContent answers one SendPart per range with
// pseudorandom bytes of exactly the requested length. Ranges longer than
// max_chunk are split into max_chunk pieces. Bytes depend only on
// (seed, file_id, offset), so identical requests get identical bytes.
std::vector<proto::SendPart> answer_part_request(Strategy strategy, const proto::FileId& file_id,
                                                 std::span<const proto::PartRange> ranges,
                                                 std::uint64_t seed, std::uint32_t max_chunk,
                                                 bool materialize = true);

class Engine {
public:
    explicit Engine(EngineConfig cfg);

    // --- server session ---
    StatusReport on_connect_result(bool connected, std::uint32_t client_id, std::int64_t now_ms);
    void on_disconnected(std::int64_t now_ms);
    StatusReport status(std::int64_t now_ms) const;
    bool connected() const { return connected_; }

    // Manager order: extend the shared list. Returns server-bound messages
    // (empty while disconnected; the offer is queued until connect).
    std::vector<proto::Message> advertise(std::vector<proto::FileMeta> files, std::int64_t now_ms,
                                          std::vector<FileObservation>& observations);

    // One decoded message from one peer.
    HandleResult handle_peer_message(const PeerContext& from, const proto::Message& msg,
                                     std::int64_t now_ms);

    // Periodic duties: OFFER-FILES keep-alive. Returns server-bound messages.
    std::vector<proto::Message> tick(std::int64_t now_ms);

    const std::string& id() const { return cfg_.honeypot_id; }
    Strategy strategy() const { return cfg_.strategy; }
    const ServerInfo& server() const { return cfg_.server; }
    const std::map<proto::FileId, proto::FileMeta>& shared_files() const { return shared_; }
    bool shares(const proto::FileId& id) const { return shared_.count(id) != 0; }
    PhaseKind peer_phase(const proto::UserId& user) const;
    std::uint64_t unknown_file_uploads() const { return unknown_file_uploads_; }

private:
    struct PeerInfo {
        PeerPhase phase;
        proto::PeerId id;
        std::uint16_t port = 0;
        std::string name;
        std::uint32_t version = 0;
        bool asked_shared_list = false;
    };

    LogRecord base_record(const PeerContext& from, const PeerInfo& info, LoggedKind kind,
                          std::int64_t now_ms) const;
    proto::Message make_offer() const;
    // Returns true if the shared list changed.
    bool merge_shared(const std::vector<proto::FileMeta>& files,
                      std::vector<FileObservation>* observations,
                      FileObservation::Source source);

    EngineConfig cfg_;
    bool connected_ = false;
    std::uint32_t client_id_ = 0;
    std::map<proto::FileId, proto::FileMeta> shared_;
    std::map<proto::UserId, PeerInfo> peers_;
    bool offer_pending_ = false;
    std::int64_t last_offer_ms_ = 0;
    std::uint64_t unknown_file_uploads_ = 0;
};

}  // namespace hnl::honeypot
