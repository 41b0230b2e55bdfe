#include "sdwn/protocol.hpp"

#include <array>
#include <cmath>

namespace sdwn::protocol {

namespace {

struct KindName {
  Kind kind;
  std::string_view name;
};

constexpr std::array<KindName, 11> kKindNames = {{
    {Kind::kHello, "HELLO"},
    {Kind::kPing, "PING"},
    {Kind::kPong, "PONG"},
    {Kind::kAddLvap, "ADD_LVAP"},
    {Kind::kRemoveLvap, "REMOVE_LVAP"},
    {Kind::kSetChannel, "SET_CHANNEL"},
    {Kind::kScanRequest, "SCAN_REQUEST"},
    {Kind::kScanReport, "SCAN_REPORT"},
    {Kind::kBusy, "BUSY"},
    {Kind::kAck, "ACK"},
    {Kind::kError, "ERROR"},
}};

// Payload alternative index each kind must carry.
std::size_t expected_index(Kind kind) {
  switch (kind) {
    case Kind::kHello: return 1;
    case Kind::kAddLvap: return 2;
    case Kind::kRemoveLvap: return 3;
    case Kind::kSetChannel: return 4;
    case Kind::kScanRequest: return 5;
    case Kind::kScanReport: return 6;
    case Kind::kBusy: return 7;
    case Kind::kError: return 8;
    case Kind::kPing:
    case Kind::kPong:
    case Kind::kAck: return 0;
  }
  return 0;
}

bool needs_reply_to(Kind kind) { return is_terminal_response(kind) || kind == Kind::kPong; }

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw EncodeError(std::string(what) + " must be finite");
}

void check_report(const ScanReport& report) {
  check_finite(report.timestamp, "report.timestamp");
  for (const auto& obs : report.observations) {
    if (obs.sta.is_zero()) throw EncodeError("observation without station address");
    check_finite(obs.raw_rssi, "observation.rssi");
    check_finite(obs.stats.airtime, "stats.airtime");
    check_finite(obs.stats.avg_rssi, "stats.avg_rssi");
    check_finite(obs.stats.window_start, "stats.window start");
    check_finite(obs.stats.window_end, "stats.window end");
  }
}

json payload_to_json(const Message& m) {
  if (m.payload.index() != expected_index(m.kind)) {
    throw EncodeError("payload does not match kind " + std::string(to_string(m.kind)));
  }
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Empty>) {
          return json::object();
        } else if constexpr (std::is_same_v<T, Hello>) {
          return {{"ap", p.ap}, {"channel", p.channel}, {"capabilities", p.capabilities}};
        } else if constexpr (std::is_same_v<T, AddLvap>) {
          if (p.lvap.sta.is_zero()) throw EncodeError("ADD_LVAP requires sta");
          if (p.lvap.bssid.is_zero()) throw EncodeError("ADD_LVAP requires bssid");
          return {{"lvap", p.lvap}};
        } else if constexpr (std::is_same_v<T, RemoveLvap>) {
          if (p.sta.is_zero()) throw EncodeError("REMOVE_LVAP requires sta");
          return {{"sta", p.sta}};
        } else if constexpr (std::is_same_v<T, SetChannel>) {
          return {{"channel", p.channel}};
        } else if constexpr (std::is_same_v<T, ScanRequest>) {
          check_finite(p.duration, "duration");
          if (!(p.duration > 0.0)) throw EncodeError("SCAN_REQUEST duration must be positive");
          return {{"channel", p.channel}, {"duration", p.duration}};
        } else if constexpr (std::is_same_v<T, ScanReportBody>) {
          check_report(p.report);
          return {{"report", p.report}};
        } else if constexpr (std::is_same_v<T, Busy>) {
          if (p.last) check_report(*p.last);
          return {{"last", p.last ? json(*p.last) : json(nullptr)}};
        } else {
          static_assert(std::is_same_v<T, ErrorBody>);
          return {{"code", p.code}, {"message", p.message}};
        }
      },
      m.payload);
}

Payload payload_from_json(Kind kind, const json& j) {
  if (!j.is_object()) throw ProtocolError("payload must be an object");
  switch (kind) {
    case Kind::kPing:
    case Kind::kPong:
    case Kind::kAck:
      if (!j.empty()) throw ProtocolError("unexpected payload fields");
      return Empty{};
    case Kind::kHello: {
      Hello h;
      h.ap = j.at("ap").get<ApId>();
      h.channel = j.at("channel").get<Channel>();
      h.capabilities = j.at("capabilities").get<std::vector<std::string>>();
      return h;
    }
    case Kind::kAddLvap: return AddLvap{j.at("lvap").get<Lvap>()};
    case Kind::kRemoveLvap: return RemoveLvap{j.at("sta").get<MacAddress>()};
    case Kind::kSetChannel: return SetChannel{j.at("channel").get<Channel>()};
    case Kind::kScanRequest: {
      ScanRequest r;
      r.channel = j.at("channel").get<Channel>();
      r.duration = j.at("duration").get<double>();
      if (!(r.duration > 0.0)) throw ProtocolError("duration must be positive");
      return r;
    }
    case Kind::kScanReport: return ScanReportBody{j.at("report").get<ScanReport>()};
    case Kind::kBusy: {
      Busy b;
      const auto& last = j.at("last");
      if (!last.is_null()) b.last = last.get<ScanReport>();
      return b;
    }
    case Kind::kError:
      return ErrorBody{j.at("code").get<std::string>(), j.at("message").get<std::string>()};
  }
  throw ProtocolError("unknown kind");
}

}  // namespace

std::string_view to_string(Kind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "UNKNOWN";
}

std::optional<Kind> kind_from_string(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  return std::nullopt;
}

bool is_request(Kind kind) {
  switch (kind) {
    case Kind::kHello:
    case Kind::kPing:
    case Kind::kAddLvap:
    case Kind::kRemoveLvap:
    case Kind::kSetChannel:
    case Kind::kScanRequest: return true;
    default: return false;
  }
}

bool is_terminal_response(Kind kind) {
  return kind == Kind::kAck || kind == Kind::kScanReport || kind == Kind::kBusy ||
         kind == Kind::kError;
}

std::vector<std::uint8_t> encode(const Message& message) {
  json body = {{"kind", to_string(message.kind)},
               {"seq", message.seq},
               {"payload", payload_to_json(message)}};
  if (needs_reply_to(message.kind)) {
    if (!message.reply_to) {
      throw EncodeError(std::string(to_string(message.kind)) + " requires reply_to");
    }
    body["reply_to"] = *message.reply_to;
  } else if (message.reply_to) {
    throw EncodeError(std::string(to_string(message.kind)) + " must not carry reply_to");
  }

  // nlohmann::json objects are std::map backed, so dump() emits sorted keys.
  const std::string text = body.dump();
  if (text.size() > kMaxBodySize) throw EncodeError("frame body too large");
  const auto n = static_cast<std::uint32_t>(text.size());
  std::vector<std::uint8_t> frame;
  frame.reserve(kHeaderSize + text.size());
  frame.push_back(static_cast<std::uint8_t>(n >> 24));
  frame.push_back(static_cast<std::uint8_t>(n >> 16));
  frame.push_back(static_cast<std::uint8_t>(n >> 8));
  frame.push_back(static_cast<std::uint8_t>(n));
  frame.insert(frame.end(), text.begin(), text.end());
  return frame;
}

DecodeResult decode(std::span<const std::uint8_t> bytes) {
  DecodeResult result;
  if (bytes.size() < kHeaderSize) return result;
  const std::uint32_t n = (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                          (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
  if (n > kMaxBodySize) {
    result.status = DecodeStatus::kProtocolError;
    result.error = "frame length " + std::to_string(n) + " exceeds limit";
    return result;
  }
  if (bytes.size() < kHeaderSize + n) return result;

  const auto body = bytes.subspan(kHeaderSize, n);
  try {
    const json j = json::parse(body.begin(), body.end());
    if (!j.is_object()) throw ProtocolError("body must be an object");
    for (const auto& [key, _] : j.items()) {
      if (key != "kind" && key != "seq" && key != "payload" && key != "reply_to") {
        throw ProtocolError("unknown field '" + key + "'");
      }
    }
    Message m;
    const auto kind = kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw ProtocolError("unknown kind");
    m.kind = *kind;
    if (!j.at("seq").is_number_unsigned()) throw ProtocolError("seq must be unsigned");
    m.seq = j.at("seq").get<std::uint64_t>();
    if (auto it = j.find("reply_to"); it != j.end()) {
      if (!it->is_number_unsigned()) throw ProtocolError("reply_to must be unsigned");
      m.reply_to = it->get<std::uint64_t>();
    }
    if (needs_reply_to(m.kind) != m.reply_to.has_value()) {
      throw ProtocolError("reply_to presence does not match kind");
    }
    m.payload = payload_from_json(m.kind, j.at("payload"));
    result.status = DecodeStatus::kOk;
    result.message = std::move(m);
    result.consumed = kHeaderSize + n;
  } catch (const std::exception& e) {
    result.status = DecodeStatus::kProtocolError;
    result.error = e.what();
  }
  return result;
}

void FrameReader::append(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameReader::next() {
  auto result = decode(std::span(buffer_).subspan(offset_));
  switch (result.status) {
    case DecodeStatus::kNeedMoreData: return std::nullopt;
    case DecodeStatus::kProtocolError: throw ProtocolError(result.error);
    case DecodeStatus::kOk: break;
  }
  offset_ += result.consumed;
  if (offset_ > 4096 && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return std::move(result.message);
}

Message make_request(Kind kind, Payload payload) {
  return Message{kind, 0, std::nullopt, std::move(payload)};
}

Message make_response(const Message& request, Kind kind, Payload payload) {
  return Message{kind, 0, request.seq, std::move(payload)};
}

Message make_error(const Message& request, std::string code, std::string message) {
  return make_response(request, Kind::kError, ErrorBody{std::move(code), std::move(message)});
}

}  // namespace sdwn::protocol
