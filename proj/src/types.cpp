#include "sdwn/types.hpp"

#include <charconv>
#include <cstdio>

namespace sdwn {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

// MacAddress ----------------------------------------------------------------

std::optional<MacAddress> MacAddress::try_parse(std::string_view text) {
  // aa:bb:cc:dd:ee:ff (or '-' separators)
  if (text.size() != 17) return std::nullopt;
  std::uint64_t value = 0;
  for (int i = 0; i < 6; ++i) {
    const std::size_t pos = static_cast<std::size_t>(i) * 3;
    const int hi = hex_digit(text[pos]);
    const int lo = hex_digit(text[pos + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    if (i < 5 && text[pos + 2] != ':' && text[pos + 2] != '-') return std::nullopt;
    value = (value << 8) | static_cast<std::uint64_t>(hi * 16 + lo);
  }
  return MacAddress(value);
}

MacAddress MacAddress::parse(std::string_view text) {
  if (auto mac = try_parse(text)) return *mac;
  throw ValidationError("invalid MAC address '" + std::string(text) + "'");
}

std::array<std::uint8_t, 6> MacAddress::octets() const {
  std::array<std::uint8_t, 6> out{};
  for (int i = 0; i < 6; ++i) {
    out[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>((value_ >> (8 * (5 - i))) & 0xFF);
  }
  return out;
}

std::string MacAddress::to_string() const {
  const auto o = octets();
  char buf[18];
  std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", o[0], o[1],
                o[2], o[3], o[4], o[5]);
  return buf;
}

// Ipv4Address ---------------------------------------------------------------

std::optional<Ipv4Address> Ipv4Address::try_parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 4; ++i) {
    if (p == end || *p < '0' || *p > '9') return std::nullopt;
    unsigned octet = 0;
    auto [next, ec] = std::from_chars(p, end, octet);
    if (ec != std::errc() || octet > 255 || next - p > 3) return std::nullopt;
    // no leading zeros ("010")
    if (next - p > 1 && *p == '0') return std::nullopt;
    value = (value << 8) | octet;
    p = next;
    if (i < 3) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
  }
  if (p != end) return std::nullopt;
  return Ipv4Address(value);
}

Ipv4Address Ipv4Address::parse(std::string_view text) {
  if (auto ip = try_parse(text)) return *ip;
  throw ValidationError("invalid IPv4 address '" + std::string(text) + "'");
}

std::string Ipv4Address::to_string() const {
  return std::to_string((value_ >> 24) & 0xFF) + "." +
         std::to_string((value_ >> 16) & 0xFF) + "." +
         std::to_string((value_ >> 8) & 0xFF) + "." +
         std::to_string(value_ & 0xFF);
}

// Channel -------------------------------------------------------------------

Channel::Channel(int number) : number_(number) {
  if (!valid(number)) {
    throw ValidationError("channel " + std::to_string(number) +
                          " outside allowed range 1..13");
  }
}

// JSON ----------------------------------------------------------------------

void to_json(json& j, const MacAddress& mac) { j = mac.to_string(); }
void from_json(const json& j, MacAddress& mac) {
  mac = MacAddress::parse(j.get<std::string>());
}

void to_json(json& j, const Ipv4Address& ip) { j = ip.to_string(); }
void from_json(const json& j, Ipv4Address& ip) {
  ip = Ipv4Address::parse(j.get<std::string>());
}

void to_json(json& j, const Channel& ch) { j = ch.value(); }
void from_json(const json& j, Channel& ch) {
  if (!j.is_number_integer()) throw ValidationError("channel must be an integer");
  ch = Channel(j.get<int>());
}

void to_json(json& j, const ApId& id) { j = json{{"ip", id.ip}, {"mac", id.mac}}; }
void from_json(const json& j, ApId& id) {
  id.ip = j.at("ip").get<Ipv4Address>();
  id.mac = j.at("mac").get<MacAddress>();
}

void to_json(json& j, const Lvap& lvap) {
  j = json{{"sta", lvap.sta},
           {"bssid", lvap.bssid},
           {"ssid", lvap.ssid},
           {"host", lvap.host}};
}
void from_json(const json& j, Lvap& lvap) {
  lvap.sta = j.at("sta").get<MacAddress>();
  lvap.bssid = j.at("bssid").get<MacAddress>();
  lvap.ssid = j.at("ssid").get<std::string>();
  lvap.host = j.at("host").get<ApId>();
}

void to_json(json& j, const StaStats& stats) {
  j = json{{"sta", stats.sta},
           {"packets", stats.packet_count},
           {"airtime", stats.airtime},
           {"avg_rssi", stats.avg_rssi},
           {"window", json::array({stats.window_start, stats.window_end})}};
}
void from_json(const json& j, StaStats& stats) {
  stats.sta = j.at("sta").get<MacAddress>();
  stats.packet_count = j.at("packets").get<std::int64_t>();
  stats.airtime = j.at("airtime").get<double>();
  stats.avg_rssi = j.at("avg_rssi").get<double>();
  const auto& window = j.at("window");
  if (!window.is_array() || window.size() != 2) {
    throw ValidationError("stats window must be [start, end]");
  }
  stats.window_start = window[0].get<double>();
  stats.window_end = window[1].get<double>();
}

void to_json(json& j, const ScanObservation& obs) {
  j = json{{"sta", obs.sta}, {"rssi", obs.raw_rssi}, {"stats", obs.stats}};
}
void from_json(const json& j, ScanObservation& obs) {
  obs.sta = j.at("sta").get<MacAddress>();
  obs.raw_rssi = j.at("rssi").get<double>();
  obs.stats = j.at("stats").get<StaStats>();
}

void to_json(json& j, const ScanReport& report) {
  j = json{{"ap", report.ap},
           {"channel", report.channel},
           {"timestamp", report.timestamp},
           {"observations", report.observations}};
}
void from_json(const json& j, ScanReport& report) {
  report.ap = j.at("ap").get<ApId>();
  report.channel = j.at("channel").get<Channel>();
  report.timestamp = j.at("timestamp").get<double>();
  report.observations = j.at("observations").get<std::vector<ScanObservation>>();
}

}  // namespace sdwn
