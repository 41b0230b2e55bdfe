#include "generators.hpp"

namespace sdwn::testing {

using namespace protocol;

MacAddress random_mac(Rng& rng) { return MacAddress(rng()); }

MacAddress random_station_mac(Rng& rng) {
  for (;;) {
    auto mac = MacAddress(rng() & ~0x010000000000ull);
    if (!mac.is_zero()) return mac;
  }
}

Ipv4Address random_ip(Rng& rng) { return Ipv4Address(static_cast<std::uint32_t>(rng())); }

Channel random_channel(Rng& rng) {
  return Channel(std::uniform_int_distribution<int>(Channel::kMin, Channel::kMax)(rng));
}

double random_double(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::string random_text(Rng& rng, std::size_t max_len) {
  // Printable ASCII plus quotes, backslashes, control characters and UTF-8.
  static const std::vector<std::string> kAlphabet = {
      "a", "Z", "0", " ", "\"", "\\", "/", "\n", "\t", "\x01", "{", "}", "\xc3\xb1", "\xe2\x82\xac"};
  std::string out;
  const auto len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
  for (std::size_t i = 0; i < len; ++i) out += kAlphabet[rng() % kAlphabet.size()];
  return out;
}

ScanReport random_report(Rng& rng, std::size_t max_observations) {
  ScanReport r;
  r.ap = {random_ip(rng), random_mac(rng)};
  r.channel = random_channel(rng);
  r.timestamp = random_double(rng, 0.0, 1e6);
  const auto n = std::uniform_int_distribution<std::size_t>(0, max_observations)(rng);
  for (std::size_t i = 0; i < n; ++i) {
    ScanObservation o;
    o.sta = random_station_mac(rng);
    o.raw_rssi = random_double(rng, -95.0, -20.0);
    o.stats.sta = o.sta;
    o.stats.packet_count = std::uniform_int_distribution<std::int64_t>(0, 100000)(rng);
    o.stats.airtime = random_double(rng, 0.0, 1.0);
    o.stats.avg_rssi = o.raw_rssi;
    o.stats.window_start = r.timestamp;
    o.stats.window_end = r.timestamp + random_double(rng, 0.001, 1.0);
    r.observations.push_back(o);
  }
  return r;
}

Message random_message(Rng& rng) {
  Message m;
  m.seq = rng() >> (rng() % 64);
  const auto kind = static_cast<Kind>(rng() % 11);
  m.kind = kind;
  switch (kind) {
    case Kind::kHello: {
      Hello h{{random_ip(rng), random_mac(rng)}, random_channel(rng), {}};
      const auto caps = rng() % 4;
      for (std::size_t i = 0; i < caps; ++i) h.capabilities.push_back(random_text(rng, 8));
      m.payload = h;
      break;
    }
    case Kind::kAddLvap: {
      const auto sta = random_station_mac(rng);
      m.payload = AddLvap{{sta, derive_bssid(sta), random_text(rng, 32),
                           {random_ip(rng), random_mac(rng)}}};
      break;
    }
    case Kind::kRemoveLvap: m.payload = RemoveLvap{random_station_mac(rng)}; break;
    case Kind::kSetChannel: m.payload = SetChannel{random_channel(rng)}; break;
    case Kind::kScanRequest:
      m.payload = ScanRequest{random_channel(rng), random_double(rng, 0.001, 1.0)};
      break;
    case Kind::kScanReport: m.payload = ScanReportBody{random_report(rng)}; break;
    case Kind::kBusy:
      m.payload = rng() % 2 ? Busy{random_report(rng)} : Busy{std::nullopt};
      break;
    case Kind::kError: m.payload = ErrorBody{random_text(rng, 12), random_text(rng, 40)}; break;
    default: break;
  }
  if (is_terminal_response(kind) || kind == Kind::kPong) m.reply_to = rng() >> (rng() % 64);
  return m;
}

}  // namespace sdwn::testing
