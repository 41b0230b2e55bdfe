#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sdwn/types.hpp"

// Controller <-> agent control protocol.
//
// Frame: 4-byte big-endian body length, then the body: compact JSON with
// lexicographically sorted keys, UTF-8, no trailing newline.
//
//   {"kind":"SCAN_REQUEST","payload":{"channel":6,"duration":0.06},"seq":7}
//
// `seq` increases strictly per direction. Responses carry `reply_to`, the
// seq of the request they terminate. docs/protocol.md has the full schema.

namespace sdwn::protocol {

enum class Kind {
  kHello,
  kPing,
  kPong,
  kAddLvap,
  kRemoveLvap,
  kSetChannel,
  kScanRequest,
  kScanReport,
  kBusy,
  kAck,
  kError,
};

std::string_view to_string(Kind kind);
std::optional<Kind> kind_from_string(std::string_view name);
/// Request kinds expect exactly one terminal response.
bool is_request(Kind kind);
bool is_terminal_response(Kind kind);

struct Empty {
  bool operator==(const Empty&) const = default;
};

struct Hello {
  ApId ap;
  Channel channel;
  std::vector<std::string> capabilities;
  bool operator==(const Hello&) const = default;
};

struct AddLvap {
  Lvap lvap;
  bool operator==(const AddLvap&) const = default;
};

struct RemoveLvap {
  MacAddress sta;
  bool operator==(const RemoveLvap&) const = default;
};

struct SetChannel {
  Channel channel;
  bool operator==(const SetChannel&) const = default;
};

struct ScanRequest {
  Channel channel;
  double duration = 0.060;
  bool operator==(const ScanRequest&) const = default;
};

struct ScanReportBody {
  ScanReport report;
  bool operator==(const ScanReportBody&) const = default;
};

struct Busy {
  std::optional<ScanReport> last;
  bool operator==(const Busy&) const = default;
};

struct ErrorBody {
  std::string code;  // "conflict", "validation", "not_found", "unsupported"
  std::string message;
  bool operator==(const ErrorBody&) const = default;
};

using Payload = std::variant<Empty, Hello, AddLvap, RemoveLvap, SetChannel, ScanRequest,
                             ScanReportBody, Busy, ErrorBody>;

struct Message {
  Kind kind = Kind::kPing;
  std::uint64_t seq = 0;
  std::optional<std::uint64_t> reply_to;
  Payload payload;

  bool operator==(const Message&) const = default;
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kHeaderSize = 4;
inline constexpr std::uint32_t kMaxBodySize = 16u << 20;

/// Throws EncodeError when the payload does not fit the kind's schema.
std::vector<std::uint8_t> encode(const Message& message);

enum class DecodeStatus { kOk, kNeedMoreData, kProtocolError };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::kNeedMoreData;
  std::optional<Message> message;
  std::size_t consumed = 0;  // bytes of one complete frame on kOk
  std::string error;
};

/// Decodes the first frame in `bytes`. Never throws.
DecodeResult decode(std::span<const std::uint8_t> bytes);

/// Accumulates stream bytes and yields complete messages.
class FrameReader {
 public:
  void append(std::span<const std::uint8_t> bytes);
  /// Throws ProtocolError on a malformed frame.
  std::optional<Message> next();
  std::size_t buffered() const { return buffer_.size() - offset_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
};

// Convenience constructors.
Message make_request(Kind kind, Payload payload = Empty{});
Message make_response(const Message& request, Kind kind, Payload payload = Empty{});
Message make_error(const Message& request, std::string code, std::string message);

}  // namespace sdwn::protocol
