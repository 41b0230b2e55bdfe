#include "sdwn/api.hpp"

#include <httplib.h>

#include <charconv>

namespace sdwn {

namespace {

ApiResponse error(int status, std::string_view code, std::string message) {
  return {status, {{"code", code}, {"message", std::move(message)}}};
}

ApiResponse not_found(std::string message) { return error(404, "not_found", std::move(message)); }
ApiResponse invalid(std::string message) { return error(400, "validation", std::move(message)); }

ApiResponse accepted(json body) {
  body["status"] = "accepted";
  return {202, std::move(body)};
}

const json& field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end()) throw ValidationError(std::string(name) + ": missing");
  return *it;
}

std::string string_field(const json& body, const char* name) {
  const auto& v = field(body, name);
  if (!v.is_string()) throw ValidationError(std::string(name) + ": expected string");
  return v.get<std::string>();
}

double number_field(const json& body, const char* name) {
  const auto& v = field(body, name);
  if (!v.is_number()) throw ValidationError(std::string(name) + ": expected number");
  return v.get<double>();
}

Channel channel_field(const json& body, const char* name) {
  const auto& v = field(body, name);
  if (!v.is_number_integer() || !Channel::valid(v.get<int>())) {
    throw ValidationError(std::string(name) + ": expected a channel number in 1..13");
  }
  return Channel(v.get<int>());
}

MacAddress mac_field(const json& body, const char* name) {
  auto mac = MacAddress::try_parse(string_field(body, name));
  if (!mac) throw ValidationError(std::string(name) + ": malformed MAC address");
  return *mac;
}

Ipv4Address ip_field(const json& body, const char* name) {
  auto ip = Ipv4Address::try_parse(string_field(body, name));
  if (!ip) throw ValidationError(std::string(name) + ": malformed IPv4 address");
  return *ip;
}

std::vector<std::string_view> split_path(std::string_view path) {
  if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    const auto end = path.find('/');
    parts.push_back(path.substr(0, end));
    if (end == std::string_view::npos) break;
    path.remove_prefix(end);
  }
  return parts;
}

}  // namespace

ListenAddress parse_listen_address(std::string_view text) {
  ListenAddress out;
  std::string_view port_text = text;
  if (auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) out.host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  unsigned value = 0;
  auto [end, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
  if (port_text.empty() || ec != std::errc() || end != port_text.data() + port_text.size() ||
      value > 65535) {
    throw ValidationError("api address: bad port in '" + std::string(text) + "'");
  }
  out.port = static_cast<std::uint16_t>(value);
  return out;
}

struct ManagementApi::Server {
  httplib::Server http;
  std::thread thread;
};

ManagementApi::ManagementApi(DataGateway& gateway, AgentRegistry& registry, EventLog* log,
                             Clock clock, IterationSource iteration, ApiOptions options)
    : gateway_(gateway),
      registry_(registry),
      log_(log),
      clock_(std::move(clock)),
      iteration_(std::move(iteration)),
      options_(options) {}

ManagementApi::~ManagementApi() { stop(); }

ApiResponse ManagementApi::handle(std::string_view method, std::string_view path,
                                  std::string_view body) {
  try {
    json parsed;
    if (method == "POST" || method == "PUT") {
      parsed = json::parse(body.begin(), body.end(), nullptr, false);
      if (parsed.is_discarded() || !parsed.is_object()) {
        return invalid("request body must be a JSON object");
      }
    }
    return dispatch(method, path, parsed);
  } catch (const ValidationError& e) {
    return invalid(e.what());
  } catch (const NotFoundError& e) {
    return not_found(e.what());
  } catch (const std::exception& e) {
    return error(500, "validation", std::string("internal error: ") + e.what());
  }
}

ApiResponse ManagementApi::dispatch(std::string_view method, std::string_view path,
                                    const json& body) {
  const auto parts = split_path(path);
  if (parts.size() < 2 || parts[0] != "api") return not_found("no such endpoint");
  const auto resource = parts[1];
  auto wrong_method = [&] {
    return error(405, "validation", std::string(method) + " not allowed on " + std::string(path));
  };

  if (parts.size() == 2) {
    if (resource == "clients") return method == "GET" ? rows(tables::kClientsEver) : wrong_method();
    if (resource == "stations") {
      return method == "GET" ? rows(tables::kStationsCurrent) : wrong_method();
    }
    if (resource == "agents") return method == "GET" ? rows(tables::kAgents) : wrong_method();
    if (resource == "matrix") {
      return method == "GET" ? ApiResponse{200, gateway_.get(tables::kMatrix, "current")}
                             : wrong_method();
    }
    if (resource == "stats") return method == "GET" ? get_stats({}) : wrong_method();
    if (resource == "params") {
      if (method == "GET") return get_params();
      if (method == "PUT") return put_params(body);
      return wrong_method();
    }
    if (resource == "handoff") return method == "POST" ? post_handoff(body) : wrong_method();
    if (resource == "scan") return method == "POST" ? post_scan(body) : wrong_method();
  }
  if (parts.size() == 3 && resource == "stats") {
    return method == "GET" ? get_stats(parts[2]) : wrong_method();
  }
  if (parts.size() == 4 && resource == "agents" && parts[3] == "channel") {
    return method == "POST" ? post_channel(parts[2], body) : wrong_method();
  }
  return not_found("no such endpoint");
}

ApiResponse ManagementApi::rows(const char* table) const {
  json out = json::array();
  for (auto& [_, row] : gateway_.list(table)) out.push_back(std::move(row));
  return {200, std::move(out)};
}

ApiResponse ManagementApi::get_stats(std::string_view ip_text) const {
  if (ip_text.empty()) return rows(tables::kStats);
  auto ip = Ipv4Address::try_parse(ip_text);
  if (!ip) return invalid("ap: malformed IPv4 address");
  auto row = gateway_.find(tables::kStats, ip->to_string());
  if (!row) return not_found("no statistics for AP " + ip->to_string());
  return {200, std::move(*row)};
}

ApiResponse ManagementApi::get_params() const {
  json pending = json::array();
  for (const auto& change : gateway_.pending_param_changes()) pending.push_back(change);
  return {200, {{"params", gateway_.applied_params()}, {"pending", std::move(pending)}}};
}

ApiResponse ManagementApi::put_params(const json& body) {
  ParamChange change{string_field(body, "name"), number_field(body, "value"), clock_()};
  gateway_.enqueue_param_change(change);
  log_mutation({{"event", "api_mutation"}, {"op", "put_params"}, {"name", change.name},
                {"value", change.value}});
  return accepted({{"name", change.name}, {"value", change.value}});
}

ApiResponse ManagementApi::post_handoff(const json& body) {
  const auto sta = mac_field(body, "sta_mac");
  const auto target = ip_field(body, "target_ip");
  auto station = gateway_.find(tables::kStationsCurrent, sta.to_string());
  if (!station) return not_found("station " + sta.to_string() + " is not associated");
  auto info = registry_.find(target);
  if (!info || !info->connected) return not_found("agent " + target.to_string() + " is not connected");
  if ((*station)["host"].get<std::string>() == target.to_string()) {
    return invalid("target_ip: station is already hosted by " + target.to_string());
  }
  gateway_.handoff_queue().push({sta, target, clock_()});
  log_mutation({{"event", "api_mutation"}, {"op", "handoff"}, {"sta", sta}, {"target", target}});
  return accepted({{"sta_mac", sta}, {"target_ip", target}});
}

ApiResponse ManagementApi::post_channel(std::string_view ip_text, const json& body) {
  auto ip = Ipv4Address::try_parse(ip_text);
  if (!ip) return invalid("ip: malformed IPv4 address");
  const auto channel = channel_field(body, "channel");
  auto info = registry_.find(*ip);
  if (!info || !info->connected) return not_found("agent " + ip->to_string() + " is not connected");
  gateway_.channel_queue().push({*ip, channel, clock_()});
  log_mutation({{"event", "api_mutation"}, {"op", "channel"}, {"ap", *ip}, {"channel", channel}});
  return accepted({{"ip", *ip}, {"channel", channel}});
}

ApiResponse ManagementApi::post_scan(const json& body) {
  const auto ip = ip_field(body, "ap_ip");
  const auto channel = channel_field(body, "channel");
  auto info = registry_.find(ip);
  if (!info) return not_found("unknown agent " + ip.to_string());
  auto link = registry_.link(ip);
  if (!link) return error(502, "agent_unreachable", "agent " + ip.to_string() + " is not connected");

  const double duration = gateway_.applied_params().scan_duration;
  const auto timeout =
      options_.scan_timeout + std::chrono::milliseconds(static_cast<long>(duration * 1000.0));
  protocol::Message response;
  try {
    response = link->call(
        protocol::make_request(protocol::Kind::kScanRequest, protocol::ScanRequest{channel, duration}),
        timeout);
  } catch (const LinkError& e) {
    return error(502, "agent_unreachable", "agent " + ip.to_string() + ": " + e.what());
  }

  if (response.kind == protocol::Kind::kScanReport) {
    json out = std::get<protocol::ScanReportBody>(response.payload).report;
    out["stale"] = false;
    return {200, std::move(out)};
  }
  if (response.kind == protocol::Kind::kBusy) {
    const auto& last = std::get<protocol::Busy>(response.payload).last;
    if (!last) return error(409, "busy", "agent is scanning and has no earlier scan");
    json out = *last;
    out["stale"] = true;
    return {200, std::move(out)};
  }
  const auto& err = std::get<protocol::ErrorBody>(response.payload);
  return error(502, "agent_unreachable", "agent refused scan: " + err.message);
}

void ManagementApi::log_mutation(json event) {
  if (!log_) return;
  event["iteration"] = iteration_ ? iteration_() : 0;
  log_->emit(std::move(event));
}

std::uint16_t ManagementApi::listen(const std::string& host, std::uint16_t port) {
  if (server_) throw Error("management API already listening");
  auto server = std::make_unique<Server>();
  auto& http = server->http;

  http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                            {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type"}});
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    auto reply = handle(req.method, req.path, req.body);
    res.status = reply.status;
    if (!reply.body.is_null()) res.set_content(reply.body.dump(), "application/json");
  };
  http.Get(".*", forward);
  http.Post(".*", forward);
  http.Put(".*", forward);
  http.Delete(".*", forward);
  http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  int bound = port == 0 ? http.bind_to_any_port(host) : (http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind management API to " + host + ":" + std::to_string(port));
  server->thread = std::thread([s = server.get()] { s->http.listen_after_bind(); });
  http.wait_until_ready();
  server_ = std::move(server);
  return static_cast<std::uint16_t>(bound);
}

void ManagementApi::stop() {
  if (!server_) return;
  server_->http.stop();
  if (server_->thread.joinable()) server_->thread.join();
  server_.reset();
}

bool ManagementApi::listening() const { return server_ != nullptr; }

}  // namespace sdwn
