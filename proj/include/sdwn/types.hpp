#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sdwn {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Error types shared by every module.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

class AlreadyExistsError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// 48-bit IEEE MAC address. The first octet is the most significant byte of
// value(), so numeric order equals textual (octet-wise) order.
class MacAddress {
 public:
  constexpr MacAddress() = default;
  explicit constexpr MacAddress(std::uint64_t value) : value_(value & kMask) {}

  static MacAddress parse(std::string_view text);
  static std::optional<MacAddress> try_parse(std::string_view text);

  constexpr std::uint64_t value() const { return value_; }
  constexpr bool is_zero() const { return value_ == 0; }
  std::array<std::uint8_t, 6> octets() const;
  std::string to_string() const;

  constexpr auto operator<=>(const MacAddress&) const = default;

 private:
  static constexpr std::uint64_t kMask = 0xFFFF'FFFF'FFFFull;
  std::uint64_t value_ = 0;
};

// Dotted-quad IPv4 address. Ordering is numeric, i.e. lexicographic over
// the four octets.
class Ipv4Address {
 public:
  constexpr Ipv4Address() = default;
  explicit constexpr Ipv4Address(std::uint32_t value) : value_(value) {}

  static Ipv4Address parse(std::string_view text);
  static std::optional<Ipv4Address> try_parse(std::string_view text);

  constexpr std::uint32_t value() const { return value_; }
  std::string to_string() const;

  constexpr auto operator<=>(const Ipv4Address&) const = default;

 private:
  std::uint32_t value_ = 0;
};

// 2.4 GHz channel, 1..13.
class Channel {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 13;

  Channel() = default;
  explicit Channel(int number);

  static bool valid(int number) { return number >= kMin && number <= kMax; }
  int value() const { return number_; }

  auto operator<=>(const Channel&) const = default;

 private:
  int number_ = kMin;
};

/// Identity of an access point. The IPv4 address is the management key.
struct ApId {
  Ipv4Address ip;
  MacAddress mac;

  auto operator<=>(const ApId&) const = default;
};

/// BSSID of the LVAP serving `sta`: locally-administered bit set, group bit
/// cleared, remaining 46 bits copied from the station address. Pure function
/// of the station address, so it survives every handoff unchanged.
constexpr MacAddress derive_bssid(MacAddress sta) {
  constexpr std::uint64_t kLocal = 0x02ull << 40;
  constexpr std::uint64_t kGroup = 0x01ull << 40;
  return MacAddress((sta.value() | kLocal) & ~kGroup);
}

/// Light virtual access point: the per-station virtual AP moved on handoff.
struct Lvap {
  MacAddress sta;
  MacAddress bssid;
  std::string ssid;
  ApId host;

  bool operator==(const Lvap&) const = default;
};

/// Per-(AP, station) traffic statistics over one measurement window.
struct StaStats {
  MacAddress sta;
  std::int64_t packet_count = 0;
  double airtime = 0.0;  // seconds
  double avg_rssi = 0.0; // dBm
  double window_start = 0.0;
  double window_end = 0.0;

  bool operator==(const StaStats&) const = default;
};

struct ScanObservation {
  MacAddress sta;
  double raw_rssi = 0.0;
  StaStats stats;

  bool operator==(const ScanObservation&) const = default;
};

/// One agent's scan of one channel.
struct ScanReport {
  ApId ap;
  Channel channel;
  double timestamp = 0.0;
  std::vector<ScanObservation> observations;

  bool operator==(const ScanReport&) const = default;
};

// JSON mappings (ADL).
void to_json(json& j, const MacAddress& mac);
void from_json(const json& j, MacAddress& mac);
void to_json(json& j, const Ipv4Address& ip);
void from_json(const json& j, Ipv4Address& ip);
void to_json(json& j, const Channel& ch);
void from_json(const json& j, Channel& ch);
void to_json(json& j, const ApId& id);
void from_json(const json& j, ApId& id);
void to_json(json& j, const Lvap& lvap);
void from_json(const json& j, Lvap& lvap);
void to_json(json& j, const StaStats& stats);
void from_json(const json& j, StaStats& stats);
void to_json(json& j, const ScanObservation& obs);
void from_json(const json& j, ScanObservation& obs);
void to_json(json& j, const ScanReport& report);
void from_json(const json& j, ScanReport& report);

}  // namespace sdwn
