// SPDX-License-Identifier: Apache-2.0
#include "hnl/control.hpp"

#include "hnl/bytes.hpp"

namespace hnl::control {

namespace {

constexpr std::uint8_t kReq = 0;
constexpr std::uint8_t kRep = 1;

struct Encoder {
    ByteWriter w;
    Op op = Op::Stop;

    void operator()(const StartReq& m) {
        op = Op::Start;
        w.u8(kReq);
        w.str16(m.server.name);
        w.str16(m.server.host);
        w.u16le(m.server.port);
    }
    void operator()(const StartRep& m) {
        op = Op::Start;
        w.u8(kRep);
        w.u8(m.ok ? 1 : 0);
    }
    void operator()(const StatusReq&) {
        op = Op::Status;
        w.u8(kReq);
    }
    void operator()(const StatusRep& m) {
        op = Op::Status;
        w.u8(kRep);
        w.str16(m.honeypot_id);
        w.u8(m.connected ? 1 : 0);
        w.u8(m.client_id.has_value() ? 1 : 0);
        w.u32le(m.client_id.value_or(0));
        w.u64le(m.records);
        w.u64le(m.dropped);
    }
    void operator()(const AdvertiseReq& m) {
        op = Op::Advertise;
        w.u8(kReq);
        w.u32le(static_cast<std::uint32_t>(m.files.size()));
        for (const auto& f : m.files) {
            w.raw(f.file_id);
            w.str16(f.name);
            w.u64le(f.size);
        }
    }
    void operator()(const AdvertiseRep& m) {
        op = Op::Advertise;
        w.u8(kRep);
        w.u32le(m.shared_count);
    }
    void operator()(const ShipLogsReq&) {
        op = Op::ShipLogs;
        w.u8(kReq);
    }
    void operator()(const ShipLogsRep& m) {
        op = Op::ShipLogs;
        w.u8(kRep);
        w.u8(m.stream);
        w.u8(m.more ? 1 : 0);
        w.raw(m.chunk);
    }
    void operator()(const StopReq&) {
        op = Op::Stop;
        w.u8(kReq);
    }
    void operator()(const StopRep&) {
        op = Op::Stop;
        w.u8(kRep);
    }
};

}  // namespace

bool is_control_opcode(std::uint8_t opcode) { return opcode >= 0xF0 && opcode <= 0xF4; }

std::vector<std::uint8_t> encode_control(const ControlMessage& msg) {
    Encoder enc;
    std::visit(enc, msg);
    auto payload = enc.w.take();
    return proto::encode_frame(static_cast<std::uint8_t>(enc.op), payload);
}

ControlDecodeResult decode_control(std::span<const std::uint8_t> frame) {
    proto::DecodeError err = proto::DecodeError::None;
    auto view = proto::parse_frame(frame, err);
    if (!view) return {std::nullopt, err};
    if (!is_control_opcode(view->opcode)) return {std::nullopt, proto::DecodeError::UnknownOpcode};

    ByteReader r(view->payload);
    std::uint8_t dir = r.u8();
    if (r.failed() || dir > 1) return {std::nullopt, proto::DecodeError::MalformedPayload};

    ControlMessage msg;
    bool ok = false;
    switch (static_cast<Op>(view->opcode)) {
        case Op::Start: {
            if (dir == kReq) {
                StartReq m;
                ok = r.str16(m.server.name) && r.str16(m.server.host);
                m.server.port = r.u16le();
                ok = ok && !r.failed();
                msg = std::move(m);
            } else {
                StartRep m;
                m.ok = r.u8() != 0;
                ok = !r.failed();
                msg = m;
            }
            break;
        }
        case Op::Status: {
            if (dir == kReq) {
                msg = StatusReq{};
                ok = true;
            } else {
                StatusRep m;
                ok = r.str16(m.honeypot_id);
                m.connected = r.u8() != 0;
                bool has_id = r.u8() != 0;
                std::uint32_t id = r.u32le();
                if (has_id) m.client_id = id;
                m.records = r.u64le();
                m.dropped = r.u64le();
                ok = ok && !r.failed();
                msg = std::move(m);
            }
            break;
        }
        case Op::Advertise: {
            if (dir == kReq) {
                AdvertiseReq m;
                std::uint32_t count = r.u32le();
                ok = !r.failed() && count <= r.remaining() / 26;
                for (std::uint32_t i = 0; ok && i < count; ++i) {
                    proto::FileMeta f;
                    ok = r.raw(f.file_id) && r.str16(f.name);
                    f.size = r.u64le();
                    ok = ok && !r.failed() && f.size > 0;
                    m.files.push_back(std::move(f));
                }
                msg = std::move(m);
            } else {
                AdvertiseRep m;
                m.shared_count = r.u32le();
                ok = !r.failed();
                msg = m;
            }
            break;
        }
        case Op::ShipLogs: {
            if (dir == kReq) {
                msg = ShipLogsReq{};
                ok = true;
            } else {
                ShipLogsRep m;
                m.stream = r.u8();
                m.more = r.u8() != 0;
                ok = !r.failed();
                auto rest = r.rest();
                m.chunk.assign(rest.begin(), rest.end());
                msg = std::move(m);
            }
            break;
        }
        case Op::Stop: {
            if (dir == kReq)
                msg = StopReq{};
            else
                msg = StopRep{};
            ok = true;
            break;
        }
    }
    if (!ok || !r.done()) return {std::nullopt, proto::DecodeError::MalformedPayload};
    return {std::move(msg), proto::DecodeError::None};
}

}  // namespace hnl::control
