// SPDX-License-Identifier: Apache-2.0
#include "hnl/honeypot.hpp"

#include "hnl/bytes.hpp"

#include <algorithm>

namespace hnl::honeypot {

const char* to_string(Strategy s) {
    return s == Strategy::NoContent ? "no-content" : "random-content";
}

std::optional<Strategy> strategy_from(std::string_view s) {
    if (s == "no-content") return Strategy::NoContent;
    if (s == "random-content") return Strategy::RandomContent;
    return std::nullopt;
}

const char* to_string(FileObservation::Source s) {
    return s == FileObservation::Source::Advertised ? "advertised" : "shared";
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic per-chunk byte stream keyed on (seed, file, offset).
void fill_random(std::vector<std::uint8_t>& out, std::uint64_t seed, const proto::FileId& file,
                 std::uint64_t offset, std::uint32_t length) {
    std::uint64_t key = seed;
    for (std::size_t i = 0; i < 16; i += 8) {
        std::uint64_t word = 0;
        for (std::size_t j = 0; j < 8; ++j) word |= static_cast<std::uint64_t>(file[i + j]) << (8 * j);
        key = splitmix(key ^ word);
    }
    std::uint64_t state = splitmix(key ^ offset);
    out.resize(length);
    std::size_t i = 0;
    while (i < length) {
        state = splitmix(state);
        std::uint64_t word = state;
        for (int j = 0; j < 8 && i < length; ++j, ++i) {
            out[i] = static_cast<std::uint8_t>(word >> (8 * j));
        }
    }
}

}  // namespace

std::vector<proto::SendPart> answer_part_request(Strategy strategy, const proto::FileId& file_id,
                                                 std::span<const proto::PartRange> ranges,
                                                 std::uint64_t seed, std::uint32_t max_chunk,
                                                 bool materialize) {
    std::vector<proto::SendPart> out;
    if (strategy == Strategy::NoContent) return out;
    for (const auto& range : ranges) {
        std::uint64_t offset = range.offset;
        std::uint64_t left = range.length;
        while (left > 0) {
            std::uint32_t piece = static_cast<std::uint32_t>(std::min<std::uint64_t>(left, max_chunk));
            proto::SendPart part;
            part.file_id = file_id;
            part.offset = offset;
            if (materialize) {
                fill_random(part.data, seed, file_id, offset, piece);
            }
            out.push_back(std::move(part));
            offset += piece;
            left -= piece;
        }
    }
    return out;
}

Engine::Engine(EngineConfig cfg) : cfg_(std::move(cfg)) {}

StatusReport Engine::status(std::int64_t now_ms) const {
    StatusReport st;
    st.honeypot_id = cfg_.honeypot_id;
    st.connected = connected_;
    if (connected_) {
        st.client_id = client_id_;
        st.id_status = proto::id_status_for(client_id_);
    }
    st.at_ms = now_ms;
    return st;
}

StatusReport Engine::on_connect_result(bool connected, std::uint32_t client_id,
                                       std::int64_t now_ms) {
    connected_ = connected;
    client_id_ = connected ? client_id : 0;
    if (connected && !shared_.empty()) offer_pending_ = true;
    return status(now_ms);
}

void Engine::on_disconnected(std::int64_t now_ms) {
    connected_ = false;
    client_id_ = 0;
    (void)now_ms;
}

proto::Message Engine::make_offer() const {
    proto::OfferFiles offer;
    offer.files.reserve(shared_.size());
    for (const auto& [id, meta] : shared_) offer.files.push_back(meta);
    return offer;
}

bool Engine::merge_shared(const std::vector<proto::FileMeta>& files,
                          std::vector<FileObservation>* observations,
                          FileObservation::Source source) {
    bool changed = false;
    for (const auto& f : files) {
        auto [it, inserted] = shared_.emplace(f.file_id, f);
        if (inserted) {
            changed = true;
            if (observations != nullptr) observations->push_back({source, f});
        }
    }
    return changed;
}

std::vector<proto::Message> Engine::advertise(std::vector<proto::FileMeta> files,
                                              std::int64_t now_ms,
                                              std::vector<FileObservation>& observations) {
    bool changed = merge_shared(files, &observations, FileObservation::Source::Advertised);
    std::vector<proto::Message> out;
    if (shared_.empty()) return out;
    if (!connected_) {
        if (changed) offer_pending_ = true;  // queued until connect
        return out;
    }
    if (changed || offer_pending_) {
        out.push_back(make_offer());
        offer_pending_ = false;
        last_offer_ms_ = now_ms;
    }
    return out;
}

std::vector<proto::Message> Engine::tick(std::int64_t now_ms) {
    std::vector<proto::Message> out;
    if (!connected_ || shared_.empty()) return out;
    if (offer_pending_ || now_ms - last_offer_ms_ >= cfg_.offer_keepalive_ms) {
        out.push_back(make_offer());
        offer_pending_ = false;
        last_offer_ms_ = now_ms;
    }
    return out;
}

PhaseKind Engine::peer_phase(const proto::UserId& user) const {
    auto it = peers_.find(user);
    return it == peers_.end() ? PhaseKind::None : it->second.phase.kind;
}

LogRecord Engine::base_record(const PeerContext& from, const PeerInfo& info, LoggedKind kind,
                              std::int64_t now_ms) const {
    LogRecord rec;
    rec.timestamp_ms = now_ms;
    rec.honeypot_id = cfg_.honeypot_id;
    rec.kind = kind;
    rec.peer = anonymize::hash_ip(from.address.ip, cfg_.salt).hex();
    rec.peer_port = from.address.port;
    rec.peer_name = sanitize_field(info.name);
    rec.peer_user_id = to_hex(info.id.user_id);
    rec.client_version = info.version;
    rec.id_status = info.id.id_status();
    rec.server_name = sanitize_field(cfg_.server.name);
    rec.server_ip = sanitize_field(cfg_.server.host);
    rec.server_port = cfg_.server.port;
    return rec;
}

HandleResult Engine::handle_peer_message(const PeerContext& from, const proto::Message& msg,
                                         std::int64_t now_ms) {
    HandleResult res;

    // HELLO: answer, ask for the peer's shared list, log. A HELLO in any phase
    // starts a new peer session (returning peers re-greet).
    if (const auto* hello = std::get_if<proto::Hello>(&msg)) {
        auto& info = peers_[hello->peer.user_id];
        bool was_greeted = info.phase.kind == PhaseKind::Greeted;
        info.id = hello->peer;
        info.port = hello->port;
        info.name = hello->client_name;
        info.version = hello->client_version;
        info.phase = {PhaseKind::Greeted, {}};
        if (!was_greeted) info.asked_shared_list = false;

        res.logs.push_back(base_record(from, info, LoggedKind::Hello, now_ms));

        proto::HelloAnswer answer;
        answer.peer.client_id = client_id_;
        answer.client_name = cfg_.honeypot_id;
        res.to_peer.emplace_back(std::move(answer));
        if (!info.asked_shared_list) {
            res.to_peer.emplace_back(proto::AskSharedList{});
            info.asked_shared_list = true;
        }
        return res;
    }

    // All other messages are attributed to the identity announced on this
    // connection; an unknown peer gets logged with zeroed identity fields.
    auto it = peers_.find(from.user);
    PeerInfo scratch;
    PeerInfo& info = it != peers_.end() ? it->second : scratch;
    if (it == peers_.end()) info.id.user_id = from.user;

    if (const auto* start = std::get_if<proto::StartUpload>(&msg)) {
        res.logs.push_back(base_record(from, info, LoggedKind::StartUpload, now_ms));
        res.logs.back().file_id = start->file_id;

        bool known = shared_.count(start->file_id) != 0;
        if (!known) ++unknown_file_uploads_;
        // ACCEPT-UPLOAD strictly from Greeted, and only for an advertised file.
        if (it != peers_.end() && info.phase.kind == PhaseKind::Greeted && known) {
            info.phase = {PhaseKind::UploadAccepted, start->file_id};
            res.to_peer.emplace_back(proto::AcceptUpload{start->file_id});
        }
        return res;
    }

    if (const auto* req = std::get_if<proto::RequestPart>(&msg)) {
        res.logs.push_back(base_record(from, info, LoggedKind::RequestPart, now_ms));
        res.logs.back().file_id = req->file_id;
        res.logs.back().ranges = req->ranges;

        // SEND-PART strictly from UploadAccepted for the accepted file.
        if (it != peers_.end() && info.phase.kind == PhaseKind::UploadAccepted &&
            info.phase.file == req->file_id) {
            auto parts = answer_part_request(cfg_.strategy, req->file_id, req->ranges,
                                             cfg_.content_seed, cfg_.max_chunk,
                                             cfg_.materialize_content);
            for (auto& p : parts) res.to_peer.emplace_back(std::move(p));
        }
        return res;
    }

    if (const auto* shared = std::get_if<proto::SharedListAnswer>(&msg)) {
        // Record the peer's list; not one of the logged query kinds.
        for (const auto& f : shared->files) {
            res.observations.push_back({FileObservation::Source::PeerShared, f});
        }
        if (cfg_.greedy.enabled && now_ms < cfg_.greedy.accretion_deadline_ms) {
            std::vector<FileObservation> accreted;
            if (merge_shared(shared->files, &accreted, FileObservation::Source::Advertised)) {
                res.offer_files_changed = true;
                offer_pending_ = true;
                for (auto& obs : accreted) res.observations.push_back(std::move(obs));
            }
        }
        return res;
    }

    if (std::get_if<proto::AskSharedList>(&msg) != nullptr) {
        // Look like a normal peer: reveal the advertised list to greeted peers.
        if (it != peers_.end() && info.phase.kind != PhaseKind::None) {
            proto::SharedListAnswer answer;
            answer.files.reserve(shared_.size());
            for (const auto& [id, meta] : shared_) answer.files.push_back(meta);
            res.to_peer.emplace_back(std::move(answer));
        }
        return res;
    }

    // HELLO-ANSWER / OFFER-FILES / ACCEPT-UPLOAD / SEND-PART from a peer make
    // no sense toward a provider; ignored (not loggable kinds).
    return res;
}

}  // namespace hnl::honeypot
