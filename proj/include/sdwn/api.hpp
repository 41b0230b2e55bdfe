#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "sdwn/event_log.hpp"
#include "sdwn/gateway.hpp"
#include "sdwn/link.hpp"

namespace sdwn {

struct ApiResponse {
  int status = 200;
  json body;  // null for bodiless responses
};

struct ApiOptions {
  std::chrono::milliseconds scan_timeout{500};
};

struct ListenAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;
};

/// Parses "host:port", ":port" or "port". Throws ValidationError.
ListenAddress parse_listen_address(std::string_view text);

/// JSON management API over the gateway. Reads come from gateway tables;
/// mutations are validated, queued and answered 202; the engine applies them
/// at its next loop boundary. Out-of-band scans go straight to the agent.
class ManagementApi {
 public:
  using Clock = std::function<double()>;
  using IterationSource = std::function<std::uint64_t()>;

  ManagementApi(DataGateway& gateway, AgentRegistry& registry, EventLog* log, Clock clock,
                IterationSource iteration, ApiOptions options = {});
  ~ManagementApi();

  ManagementApi(const ManagementApi&) = delete;
  ManagementApi& operator=(const ManagementApi&) = delete;

  /// Transport-free dispatch. Never throws.
  ApiResponse handle(std::string_view method, std::string_view path, std::string_view body);

  /// Serves HTTP on a background thread. Port 0 picks a free port; returns
  /// the bound port. Throws Error when binding fails.
  std::uint16_t listen(const std::string& host, std::uint16_t port);
  void stop();
  bool listening() const;

 private:
  ApiResponse dispatch(std::string_view method, std::string_view path, const json& body);
  ApiResponse rows(const char* table) const;
  ApiResponse get_params() const;
  ApiResponse put_params(const json& body);
  ApiResponse post_handoff(const json& body);
  ApiResponse post_channel(std::string_view ip_text, const json& body);
  ApiResponse post_scan(const json& body);
  ApiResponse get_stats(std::string_view ip_text) const;
  void log_mutation(json event);

  DataGateway& gateway_;
  AgentRegistry& registry_;
  EventLog* log_;
  Clock clock_;
  IterationSource iteration_;
  ApiOptions options_;

  struct Server;
  std::unique_ptr<Server> server_;
};

}  // namespace sdwn
