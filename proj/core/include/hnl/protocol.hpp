// SPDX-License-Identifier: Apache-2.0
// eDonkey-style message set and wire codec.
//
// Frame layout (bit-exact):
//   byte 0      magic 0xE3
//   bytes 1-4   u32 LE = N, the byte count of opcode + payload
//   byte 5      opcode
//   bytes 6..   payload (N-1 bytes); total frame length = 5 + N
//
// Payload layouts (strings are u16 LE length + UTF-8 bytes, lists are u32 LE
// count prefix, all integers little-endian):
//   Hello / HelloAnswer   user_id[16]  client_id:u32  port:u16  name:str  version:u32
//   OfferFiles / SharedListAnswer   count:u32, then per file: file_id[16] name:str size:u64
//   StartUpload / AcceptUpload      file_id[16]
//   RequestPart           file_id[16]  count:u32, then per range: offset:u64 length:u32
//   SendPart              file_id[16]  offset:u64  data (rest of payload)
//   AskSharedList         (empty)
//
// Interoperability with real clients is a non-goal; this layout is this
// project's own contract.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hnl::proto {

using UserId = std::array<std::uint8_t, 16>;
using FileId = std::array<std::uint8_t, 16>;

enum class IdStatus : std::uint8_t { High, Low };

// client_id is the peer's IPv4 when directly reachable (high ID); servers hand
// a small number (< 2^24) to peers behind NAT (low ID).
inline constexpr std::uint32_t kLowIdThreshold = 1u << 24;

constexpr IdStatus id_status_for(std::uint32_t client_id) {
    return client_id >= kLowIdThreshold ? IdStatus::High : IdStatus::Low;
}

inline const char* to_string(IdStatus s) { return s == IdStatus::High ? "high" : "low"; }

// user_id is stable across sessions; client_id is per server session.
struct PeerId {
    UserId user_id{};
    std::uint32_t client_id = 0;

    IdStatus id_status() const { return id_status_for(client_id); }
    bool operator==(const PeerId&) const = default;
};

// file_id derives from content only; same content, same id, regardless of name.
struct FileMeta {
    FileId file_id{};
    std::string name;
    std::uint64_t size = 0;

    bool operator==(const FileMeta&) const = default;
};

struct PartRange {
    std::uint64_t offset = 0;
    std::uint32_t length = 0;

    bool operator==(const PartRange&) const = default;
};

struct Hello {
    PeerId peer;
    std::uint16_t port = 0;
    std::string client_name;
    std::uint32_t client_version = 0;

    bool operator==(const Hello&) const = default;
};

// Same fields as Hello. When a server answers a connecting client, the
// client_id field carries the id assigned to that client for the session.
struct HelloAnswer {
    PeerId peer;
    std::uint16_t port = 0;
    std::string client_name;
    std::uint32_t client_version = 0;

    bool operator==(const HelloAnswer&) const = default;
};

struct OfferFiles {
    std::vector<FileMeta> files;

    bool operator==(const OfferFiles&) const = default;
};

struct StartUpload {
    FileId file_id{};

    bool operator==(const StartUpload&) const = default;
};

struct AcceptUpload {
    FileId file_id{};

    bool operator==(const AcceptUpload&) const = default;
};

struct RequestPart {
    FileId file_id{};
    std::vector<PartRange> ranges;  // never empty in a valid message

    bool operator==(const RequestPart&) const = default;
};

struct SendPart {
    FileId file_id{};
    std::uint64_t offset = 0;
    std::vector<std::uint8_t> data;

    bool operator==(const SendPart&) const = default;
};

struct AskSharedList {
    bool operator==(const AskSharedList&) const = default;
};

struct SharedListAnswer {
    std::vector<FileMeta> files;

    bool operator==(const SharedListAnswer&) const = default;
};

using Message = std::variant<Hello, HelloAnswer, OfferFiles, StartUpload, AcceptUpload,
                             RequestPart, SendPart, AskSharedList, SharedListAnswer>;

enum class Opcode : std::uint8_t {
    Hello = 0x01,
    HelloAnswer = 0x4C,
    OfferFiles = 0x15,
    StartUpload = 0x54,
    AcceptUpload = 0x55,
    RequestPart = 0x47,
    SendPart = 0x46,
    AskSharedList = 0x4A,
    SharedListAnswer = 0x4B,
};

inline constexpr std::uint8_t kFrameMagic = 0xE3;
inline constexpr std::size_t kFrameHeaderSize = 6;  // magic + length + opcode
inline constexpr std::size_t kMaxPayload = 1u << 24;

Opcode opcode_of(const Message& msg);
const char* kind_name(const Message& msg);

class EncodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws EncodeError if the payload exceeds kMaxPayload.
std::vector<std::uint8_t> encode_message(const Message& msg);

// Raw framing for other opcode spaces (control channel).
std::vector<std::uint8_t> encode_frame(std::uint8_t opcode, std::span<const std::uint8_t> payload);

enum class DecodeError : std::uint8_t {
    None = 0,
    BadMagic,
    Truncated,
    LengthMismatch,
    UnknownOpcode,
    MalformedPayload,
};

const char* to_string(DecodeError err);

struct DecodeResult {
    std::optional<Message> message;
    DecodeError error = DecodeError::None;

    bool ok() const { return message.has_value(); }
};

// Total on arbitrary input: never throws, never reads out of bounds.
DecodeResult decode_message(std::span<const std::uint8_t> frame);

// Frame header accessors shared with the control channel decoder.
struct FrameView {
    std::uint8_t opcode = 0;
    std::span<const std::uint8_t> payload;
};

// Validates magic/length/size; does not interpret the opcode.
std::optional<FrameView> parse_frame(std::span<const std::uint8_t> frame, DecodeError& err);

}  // namespace hnl::proto
