// SPDX-License-Identifier: Apache-2.0
#include "hnl/protocol.hpp"

#include "hnl/bytes.hpp"

namespace hnl::proto {

namespace {

void put_file_meta(ByteWriter& w, const FileMeta& f) {
    w.raw(f.file_id);
    w.str16(f.name);
    w.u64le(f.size);
}

void put_file_list(ByteWriter& w, const std::vector<FileMeta>& files) {
    w.u32le(static_cast<std::uint32_t>(files.size()));
    for (const auto& f : files) put_file_meta(w, f);
}

void put_peer_header(ByteWriter& w, const PeerId& peer, std::uint16_t port,
                     const std::string& name, std::uint32_t version) {
    w.raw(peer.user_id);
    w.u32le(peer.client_id);
    w.u16le(port);
    w.str16(name);
    w.u32le(version);
}

struct PayloadEncoder {
    ByteWriter w;

    void operator()(const Hello& m) { put_peer_header(w, m.peer, m.port, m.client_name, m.client_version); }
    void operator()(const HelloAnswer& m) { put_peer_header(w, m.peer, m.port, m.client_name, m.client_version); }
    void operator()(const OfferFiles& m) { put_file_list(w, m.files); }
    void operator()(const StartUpload& m) { w.raw(m.file_id); }
    void operator()(const AcceptUpload& m) { w.raw(m.file_id); }
    void operator()(const RequestPart& m) {
        w.raw(m.file_id);
        w.u32le(static_cast<std::uint32_t>(m.ranges.size()));
        for (const auto& r : m.ranges) {
            w.u64le(r.offset);
            w.u32le(r.length);
        }
    }
    void operator()(const SendPart& m) {
        w.raw(m.file_id);
        w.u64le(m.offset);
        w.raw(m.data);
    }
    void operator()(const AskSharedList&) {}
    void operator()(const SharedListAnswer& m) { put_file_list(w, m.files); }
};

bool get_file_meta(ByteReader& r, FileMeta& f) {
    if (!r.raw(f.file_id)) return false;
    if (!r.str16(f.name)) return false;
    f.size = r.u64le();
    if (r.failed()) return false;
    return f.size > 0;
}

bool get_file_list(ByteReader& r, std::vector<FileMeta>& out) {
    std::uint32_t count = r.u32le();
    if (r.failed()) return false;
    // Minimum encoded FileMeta is 26 bytes; an impossible count is malformed,
    // not an allocation request.
    if (count > r.remaining() / 26) return false;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        FileMeta f;
        if (!get_file_meta(r, f)) return false;
        out.push_back(std::move(f));
    }
    return true;
}

template <typename T>
bool get_peer_header(ByteReader& r, T& m) {
    if (!r.raw(m.peer.user_id)) return false;
    m.peer.client_id = r.u32le();
    m.port = r.u16le();
    if (!r.str16(m.client_name)) return false;
    m.client_version = r.u32le();
    return !r.failed();
}

std::optional<Message> decode_payload(Opcode op, std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    Message msg;
    bool ok = false;
    switch (op) {
        case Opcode::Hello: {
            Hello m;
            ok = get_peer_header(r, m);
            msg = std::move(m);
            break;
        }
        case Opcode::HelloAnswer: {
            HelloAnswer m;
            ok = get_peer_header(r, m);
            msg = std::move(m);
            break;
        }
        case Opcode::OfferFiles: {
            OfferFiles m;
            ok = get_file_list(r, m.files);
            msg = std::move(m);
            break;
        }
        case Opcode::StartUpload: {
            StartUpload m;
            ok = r.raw(m.file_id);
            msg = m;
            break;
        }
        case Opcode::AcceptUpload: {
            AcceptUpload m;
            ok = r.raw(m.file_id);
            msg = m;
            break;
        }
        case Opcode::RequestPart: {
            RequestPart m;
            ok = r.raw(m.file_id);
            if (ok) {
                std::uint32_t count = r.u32le();
                ok = !r.failed() && count >= 1 && count <= r.remaining() / 12;
                for (std::uint32_t i = 0; ok && i < count; ++i) {
                    PartRange range;
                    range.offset = r.u64le();
                    range.length = r.u32le();
                    ok = !r.failed();
                    m.ranges.push_back(range);
                }
            }
            msg = std::move(m);
            break;
        }
        case Opcode::SendPart: {
            SendPart m;
            ok = r.raw(m.file_id);
            if (ok) {
                m.offset = r.u64le();
                ok = !r.failed();
                auto rest = r.rest();
                m.data.assign(rest.begin(), rest.end());
            }
            msg = std::move(m);
            break;
        }
        case Opcode::AskSharedList: {
            msg = AskSharedList{};
            ok = true;
            break;
        }
        case Opcode::SharedListAnswer: {
            SharedListAnswer m;
            ok = get_file_list(r, m.files);
            msg = std::move(m);
            break;
        }
    }
    if (!ok || !r.done()) return std::nullopt;  // trailing bytes are malformed too
    return msg;
}

bool known_opcode(std::uint8_t op) {
    switch (static_cast<Opcode>(op)) {
        case Opcode::Hello:
        case Opcode::HelloAnswer:
        case Opcode::OfferFiles:
        case Opcode::StartUpload:
        case Opcode::AcceptUpload:
        case Opcode::RequestPart:
        case Opcode::SendPart:
        case Opcode::AskSharedList:
        case Opcode::SharedListAnswer:
            return true;
    }
    return false;
}

}  // namespace

Opcode opcode_of(const Message& msg) {
    struct Visitor {
        Opcode operator()(const Hello&) const { return Opcode::Hello; }
        Opcode operator()(const HelloAnswer&) const { return Opcode::HelloAnswer; }
        Opcode operator()(const OfferFiles&) const { return Opcode::OfferFiles; }
        Opcode operator()(const StartUpload&) const { return Opcode::StartUpload; }
        Opcode operator()(const AcceptUpload&) const { return Opcode::AcceptUpload; }
        Opcode operator()(const RequestPart&) const { return Opcode::RequestPart; }
        Opcode operator()(const SendPart&) const { return Opcode::SendPart; }
        Opcode operator()(const AskSharedList&) const { return Opcode::AskSharedList; }
        Opcode operator()(const SharedListAnswer&) const { return Opcode::SharedListAnswer; }
    };
    return std::visit(Visitor{}, msg);
}

const char* kind_name(const Message& msg) {
    switch (opcode_of(msg)) {
        case Opcode::Hello: return "HELLO";
        case Opcode::HelloAnswer: return "HELLO-ANSWER";
        case Opcode::OfferFiles: return "OFFER-FILES";
        case Opcode::StartUpload: return "START-UPLOAD";
        case Opcode::AcceptUpload: return "ACCEPT-UPLOAD";
        case Opcode::RequestPart: return "REQUEST-PART";
        case Opcode::SendPart: return "SEND-PART";
        case Opcode::AskSharedList: return "ASK-SHARED-LIST";
        case Opcode::SharedListAnswer: return "SHARED-LIST-ANSWER";
    }
    return "?";
}

std::vector<std::uint8_t> encode_frame(std::uint8_t opcode, std::span<const std::uint8_t> payload) {
    if (payload.size() > kMaxPayload) throw EncodeError("payload exceeds frame limit");
    std::vector<std::uint8_t> frame;
    frame.reserve(kFrameHeaderSize + payload.size());
    frame.push_back(kFrameMagic);
    std::uint32_t n = static_cast<std::uint32_t>(payload.size() + 1);
    for (int i = 0; i < 4; ++i) frame.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
    frame.push_back(opcode);
    frame.insert(frame.end(), payload.begin(), payload.end());
    return frame;
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
    PayloadEncoder enc;
    std::visit(enc, msg);
    auto payload = enc.w.take();
    return encode_frame(static_cast<std::uint8_t>(opcode_of(msg)), payload);
}

std::optional<FrameView> parse_frame(std::span<const std::uint8_t> frame, DecodeError& err) {
    if (frame.empty()) {
        err = DecodeError::Truncated;
        return std::nullopt;
    }
    if (frame[0] != kFrameMagic) {
        err = DecodeError::BadMagic;
        return std::nullopt;
    }
    if (frame.size() < kFrameHeaderSize) {
        err = DecodeError::Truncated;
        return std::nullopt;
    }
    std::uint32_t n = 0;
    for (int i = 3; i >= 0; --i) n = (n << 8) | frame[1 + static_cast<std::size_t>(i)];
    if (n == 0 || frame.size() < 5 + static_cast<std::size_t>(n)) {
        err = DecodeError::Truncated;
        return std::nullopt;
    }
    if (frame.size() > 5 + static_cast<std::size_t>(n)) {
        err = DecodeError::LengthMismatch;
        return std::nullopt;
    }
    return FrameView{frame[5], frame.subspan(kFrameHeaderSize)};
}

DecodeResult decode_message(std::span<const std::uint8_t> frame) {
    DecodeError err = DecodeError::None;
    auto view = parse_frame(frame, err);
    if (!view) return {std::nullopt, err};
    if (!known_opcode(view->opcode)) return {std::nullopt, DecodeError::UnknownOpcode};
    auto msg = decode_payload(static_cast<Opcode>(view->opcode), view->payload);
    if (!msg) return {std::nullopt, DecodeError::MalformedPayload};
    return {std::move(msg), DecodeError::None};
}

const char* to_string(DecodeError err) {
    switch (err) {
        case DecodeError::None: return "none";
        case DecodeError::BadMagic: return "bad magic";
        case DecodeError::Truncated: return "truncated frame";
        case DecodeError::LengthMismatch: return "length mismatch";
        case DecodeError::UnknownOpcode: return "unknown opcode";
        case DecodeError::MalformedPayload: return "malformed payload";
    }
    return "?";
}

}  // namespace hnl::proto
