#include "sdwn/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sdwn {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ValidationError(field + ": " + message);
}

const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing required field");
  return *it;
}

double number(const json& value, const std::string& path) {
  if (!value.is_number()) fail(path, "expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return number(*it, path + "." + key);
}

std::string string(const json& value, const std::string& path) {
  if (!value.is_string()) fail(path, "expected a string");
  return value.get<std::string>();
}

Position position(const json& value, const std::string& path) {
  if (value.is_array()) {
    if (value.size() != 2) fail(path, "position must be [x, y]");
    return {number(value[0], path + "[0]"), number(value[1], path + "[1]")};
  }
  return {number(member(value, "x", path), path + ".x"),
          number(member(value, "y", path), path + ".y")};
}

template <typename T>
T parse_address(const json& value, const std::string& path) {
  const auto text = string(value, path);
  auto parsed = T::try_parse(text);
  if (!parsed) fail(path, "invalid address '" + text + "'");
  return *parsed;
}

Channel channel(const json& value, const std::string& path) {
  if (!value.is_number_integer()) fail(path, "channel must be an integer");
  const int c = value.get<int>();
  if (!Channel::valid(c)) fail(path, "channel " + std::to_string(c) + " outside 1..13");
  return Channel(c);
}

}  // namespace

void Scenario::validate() const {
  if (!(world.width > 0.0) || !std::isfinite(world.width)) fail("world.width", "must be positive");
  if (!(world.height > 0.0) || !std::isfinite(world.height)) {
    fail("world.height", "must be positive");
  }
  try {
    radio.validate();
  } catch (const ValidationError& e) {
    fail("radio", e.what());
  }
  try {
    params.validate();
  } catch (const ValidationError& e) {
    fail("params", e.what());
  }
  if (aps.empty()) fail("aps", "at least one AP is required");

  std::set<Ipv4Address> ips;
  std::set<MacAddress> ap_macs;
  for (std::size_t i = 0; i < aps.size(); ++i) {
    const auto path = "aps[" + std::to_string(i) + "]";
    const auto& ap = aps[i];
    if (!ips.insert(ap.id.ip).second) {
      fail(path + ".ip", "duplicate AP ip " + ap.id.ip.to_string());
    }
    if (!ap_macs.insert(ap.id.mac).second) {
      fail(path + ".mac", "duplicate AP mac " + ap.id.mac.to_string());
    }
    if (!world.contains(ap.position)) fail(path + ".position", "outside world bounds");
  }

  std::set<MacAddress> sta_macs;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const auto path = "stations[" + std::to_string(i) + "]";
    const auto& sta = stations[i];
    if (sta.mac.is_zero()) fail(path + ".mac", "must not be all-zero");
    if (!sta_macs.insert(sta.mac).second) {
      fail(path + ".mac", "duplicate station mac " + sta.mac.to_string());
    }
    if (sta.track.empty()) fail(path + ".track", "at least one waypoint is required");
    for (std::size_t w = 0; w < sta.track.size(); ++w) {
      const auto wpath = path + ".track[" + std::to_string(w) + "]";
      if (!world.contains(sta.track[w].position)) fail(wpath, "outside world bounds");
      if (w > 0 && !(sta.track[w].arrival_time > sta.track[w - 1].arrival_time)) {
        fail(wpath + ".t", "arrival times must be strictly increasing");
      }
    }
    if (!(sta.offered_load_pps >= 0.0)) fail(path + ".offered_load_pps", "must be >= 0");
    if (sta.initial_ap && !ips.contains(*sta.initial_ap)) {
      fail(path + ".initial_ap", "unknown AP " + sta.initial_ap->to_string());
    }
    if (sta.join_time && sta.leave_time && !(*sta.join_time < *sta.leave_time)) {
      fail(path + ".leave_time", "must be after join_time");
    }
  }

  // BSSIDs are derived from station addresses; two stations must not collide.
  std::set<MacAddress> bssids;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (!bssids.insert(derive_bssid(stations[i].mac)).second) {
      fail("stations[" + std::to_string(i) + "].mac", "derived BSSID collides with another station");
    }
  }
}

std::vector<ApSite> Scenario::ap_sites() const {
  std::vector<ApSite> out;
  for (const auto& ap : aps) out.push_back({ap.id, ap.position, ap.channel});
  return out;
}

std::vector<StationSite> Scenario::station_sites() const {
  std::vector<StationSite> out;
  for (const auto& sta : stations) {
    out.push_back({sta.mac, MobilityTrack(sta.track), sta.offered_load_pps, sta.join_time,
                   sta.leave_time});
  }
  return out;
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) fail("<root>", "scenario must be a JSON object");
  Scenario s;
  if (auto it = doc.find("name"); it != doc.end()) s.name = string(*it, "name");
  if (auto it = doc.find("ssid"); it != doc.end()) s.ssid = string(*it, "ssid");

  const auto& world = member(doc, "world", "");
  s.world.width = number(member(world, "width", "world"), "world.width");
  s.world.height = number(member(world, "height", "world"), "world.height");

  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) fail("seed", "must be a non-negative integer");
    s.radio.seed = it->get<std::uint64_t>();
  }

  if (auto it = doc.find("radio"); it != doc.end()) {
    const auto& r = *it;
    if (!r.is_object()) fail("radio", "expected an object");
    static const std::set<std::string> kKnown = {"tx_power",     "ref_loss",    "path_loss_exponent",
                                                 "noise_sigma",  "rssi_floor",  "rssi_ceiling"};
    for (const auto& [key, _] : r.items()) {
      if (!kKnown.contains(key)) fail("radio." + key, "unknown field");
    }
    if (auto v = optional_number(r, "tx_power", "radio")) s.radio.tx_power = *v;
    if (auto v = optional_number(r, "ref_loss", "radio")) s.radio.ref_loss = *v;
    if (auto v = optional_number(r, "path_loss_exponent", "radio")) s.radio.path_loss_exponent = *v;
    if (auto v = optional_number(r, "noise_sigma", "radio")) s.radio.noise_sigma = *v;
    if (auto v = optional_number(r, "rssi_floor", "radio")) s.radio.rssi_floor = *v;
    if (auto v = optional_number(r, "rssi_ceiling", "radio")) s.radio.rssi_ceiling = *v;
  }

  if (auto it = doc.find("params"); it != doc.end()) {
    if (!it->is_object()) fail("params", "expected an object");
    try {
      s.params = it->get<Parameters>();
    } catch (const ValidationError& e) {
      fail("params", e.what());
    }
  }

  const auto& aps = member(doc, "aps", "");
  if (!aps.is_array()) fail("aps", "expected an array");
  for (std::size_t i = 0; i < aps.size(); ++i) {
    const auto path = "aps[" + std::to_string(i) + "]";
    const auto& a = aps[i];
    ScenarioAp ap;
    ap.id.ip = parse_address<Ipv4Address>(member(a, "ip", path), path + ".ip");
    if (auto it = a.find("mac"); it != a.end()) {
      ap.id.mac = parse_address<MacAddress>(*it, path + ".mac");
    } else {
      // 02:00:<ip> when not given
      ap.id.mac = MacAddress((0x02ull << 40) | ap.id.ip.value());
    }
    ap.position = position(member(a, "position", path), path + ".position");
    ap.channel = channel(member(a, "channel", path), path + ".channel");
    s.aps.push_back(ap);
  }

  if (auto it = doc.find("stations"); it != doc.end()) {
    if (!it->is_array()) fail("stations", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto path = "stations[" + std::to_string(i) + "]";
      const auto& st = (*it)[i];
      ScenarioStation sta;
      sta.mac = parse_address<MacAddress>(member(st, "mac", path), path + ".mac");
      if (auto p = st.find("position"); p != st.end()) {
        sta.track.push_back({position(*p, path + ".position"), 0.0});
      }
      if (auto tr = st.find("track"); tr != st.end()) {
        if (!sta.track.empty()) fail(path, "give either position or track, not both");
        if (!tr->is_array()) fail(path + ".track", "expected an array");
        for (std::size_t w = 0; w < tr->size(); ++w) {
          const auto wpath = path + ".track[" + std::to_string(w) + "]";
          const auto& wp = (*tr)[w];
          Waypoint waypoint;
          waypoint.position = {number(member(wp, "x", wpath), wpath + ".x"),
                               number(member(wp, "y", wpath), wpath + ".y")};
          waypoint.arrival_time = number(member(wp, "t", wpath), wpath + ".t");
          sta.track.push_back(waypoint);
        }
      }
      if (sta.track.empty()) fail(path + ".track", "missing required field (position or track)");
      if (auto v = optional_number(st, "offered_load_pps", path)) sta.offered_load_pps = *v;
      if (auto ap = st.find("initial_ap"); ap != st.end() && !ap->is_null()) {
        sta.initial_ap = parse_address<Ipv4Address>(*ap, path + ".initial_ap");
      }
      sta.join_time = optional_number(st, "join_time", path);
      sta.leave_time = optional_number(st, "leave_time", path);
      s.stations.push_back(std::move(sta));
    }
  }

  s.validate();
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("<root>: malformed JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open scenario file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

json scenario_to_json(const Scenario& s) {
  json aps = json::array();
  for (const auto& ap : s.aps) {
    aps.push_back({{"ip", ap.id.ip},
                   {"mac", ap.id.mac},
                   {"position", {ap.position.x, ap.position.y}},
                   {"channel", ap.channel}});
  }
  json stations = json::array();
  for (const auto& sta : s.stations) {
    json track = json::array();
    for (const auto& w : sta.track) {
      track.push_back({{"x", w.position.x}, {"y", w.position.y}, {"t", w.arrival_time}});
    }
    json entry = {{"mac", sta.mac}, {"track", track}, {"offered_load_pps", sta.offered_load_pps}};
    if (sta.initial_ap) entry["initial_ap"] = *sta.initial_ap;
    if (sta.join_time) entry["join_time"] = *sta.join_time;
    if (sta.leave_time) entry["leave_time"] = *sta.leave_time;
    stations.push_back(entry);
  }
  return {{"name", s.name},
          {"ssid", s.ssid},
          {"seed", s.radio.seed},
          {"world", {{"width", s.world.width}, {"height", s.world.height}}},
          {"radio",
           {{"tx_power", s.radio.tx_power},
            {"ref_loss", s.radio.ref_loss},
            {"path_loss_exponent", s.radio.path_loss_exponent},
            {"noise_sigma", s.radio.noise_sigma},
            {"rssi_floor", s.radio.rssi_floor},
            {"rssi_ceiling", s.radio.rssi_ceiling}}},
          {"params", s.params},
          {"aps", aps},
          {"stations", stations}};
}

}  // namespace sdwn
