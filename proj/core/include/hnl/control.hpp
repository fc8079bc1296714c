// SPDX-License-Identifier: Apache-2.0
// Manager <-> honeypot control channel. Reuses the peer-protocol framing with
// a reserved opcode range; each frame's first payload byte says whether it is
// a request (0) or a response (1).
//
//   Start     0xF0  req: server_name:str server_host:str server_port:u16
//                   rep: ok:u8
//   Status    0xF1  req: (empty)
//                   rep: honeypot_id:str connected:u8 has_id:u8 client_id:u32
//                        records:u64 dropped:u64
//   Advertise 0xF2  req: count:u32 (file_id[16] name:str size:u64)*
//                   rep: shared_count:u32
//   ShipLogs  0xF3  req: (empty)
//                   rep*: stream:u8 (0 log, 1 files, 0xFF end) more:u8 chunk
//   Stop      0xF4  req: (empty)   rep: (empty)
#pragma once

#include "hnl/honeypot.hpp"
#include "hnl/protocol.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hnl::control {

enum class Op : std::uint8_t {
    Start = 0xF0,
    Status = 0xF1,
    Advertise = 0xF2,
    ShipLogs = 0xF3,
    Stop = 0xF4,
};

inline constexpr std::size_t kShipChunkMax = 4u << 20;

struct StartReq {
    honeypot::ServerInfo server;
    bool operator==(const StartReq&) const = default;
};
struct StartRep {
    bool ok = false;
    bool operator==(const StartRep&) const = default;
};
struct StatusReq {
    bool operator==(const StatusReq&) const = default;
};
struct StatusRep {
    std::string honeypot_id;
    bool connected = false;
    std::optional<std::uint32_t> client_id;
    std::uint64_t records = 0;
    std::uint64_t dropped = 0;
    bool operator==(const StatusRep&) const = default;
};
struct AdvertiseReq {
    std::vector<proto::FileMeta> files;
    bool operator==(const AdvertiseReq&) const = default;
};
struct AdvertiseRep {
    std::uint32_t shared_count = 0;
    bool operator==(const AdvertiseRep&) const = default;
};
struct ShipLogsReq {
    bool operator==(const ShipLogsReq&) const = default;
};
struct ShipLogsRep {
    std::uint8_t stream = 0xFF;  // 0 = query log, 1 = files sidecar, 0xFF = end
    bool more = false;
    std::vector<std::uint8_t> chunk;
    bool operator==(const ShipLogsRep&) const = default;
};
struct StopReq {
    bool operator==(const StopReq&) const = default;
};
struct StopRep {
    bool operator==(const StopRep&) const = default;
};

using ControlMessage = std::variant<StartReq, StartRep, StatusReq, StatusRep, AdvertiseReq,
                                    AdvertiseRep, ShipLogsReq, ShipLogsRep, StopReq, StopRep>;

std::vector<std::uint8_t> encode_control(const ControlMessage& msg);

struct ControlDecodeResult {
    std::optional<ControlMessage> message;
    proto::DecodeError error = proto::DecodeError::None;
    bool ok() const { return message.has_value(); }
};

ControlDecodeResult decode_control(std::span<const std::uint8_t> frame);

// True if the opcode falls in the reserved control range.
bool is_control_opcode(std::uint8_t opcode);

}  // namespace hnl::control
