#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sdwn/agent.hpp"
#include "sdwn/api.hpp"
#include "sdwn/engine.hpp"
#include "sdwn/scenario.hpp"
#include "sdwn/tcp.hpp"

namespace sdwn {

enum class Transport { kLocal, kTcp };
enum class Pacing { kVirtual, kRealtime };

Transport transport_from_string(std::string_view text);
Pacing pacing_from_string(std::string_view text);

struct RuntimeOptions {
  Transport transport = Transport::kLocal;
  /// Agents sleep for the scan duration, as a radio would.
  bool realtime_scans = false;
  std::optional<ListenAddress> api;  // no HTTP server when empty
  EventLog* log = nullptr;
  std::chrono::milliseconds request_timeout{500};
  std::chrono::milliseconds connect_timeout{5000};
};

/// One controller with its simulated APs, wired from a scenario. Owns the
/// radio world, the agents and their transport, the gateway, the selection
/// engine and the management API. Simulated time starts at 0 and advances
/// by the applied scan interval after every iteration.
class Runtime {
 public:
  Runtime(Scenario scenario, RuntimeOptions options);
  ~Runtime();

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  /// Connects the agents, initializes the engine and places the stations
  /// that start associated. Throws Error if agents fail to connect.
  void start();

  /// One loop iteration at now(), then advances the clock.
  IterationSummary step();
  /// Steps while now() < duration. Realtime pacing sleeps so iteration k
  /// starts k scan intervals of wall time after the first.
  std::vector<IterationSummary> run_for(double duration, Pacing pacing = Pacing::kVirtual);

  /// API first, then engine, agents and the radio world.
  void shutdown();

  double now() const { return now_.load(); }
  const Scenario& scenario() const { return scenario_; }
  RadioEnvironment& env() { return *env_; }
  DataGateway& gateway() { return gateway_; }
  AgentRegistry& registry() { return registry_; }
  SelectionEngine& engine() { return *engine_; }
  ManagementApi& api() { return *api_; }
  std::optional<std::uint16_t> api_port() const { return api_port_; }

  std::shared_ptr<Agent> agent(Ipv4Address ip) const;
  /// Local transport only; nullptr otherwise or when disconnected.
  std::shared_ptr<LocalLink> local_link(Ipv4Address ip) const;

  /// Cuts the agent's control connection (it drops its LVAPs).
  void disconnect_agent(Ipv4Address ip);
  /// Local transport: opens a fresh link and says HELLO. TCP endpoints
  /// redial on their own.
  void reconnect_agent(Ipv4Address ip);

 private:
  void connect_local(const std::shared_ptr<Agent>& agent);

  Scenario scenario_;
  RuntimeOptions options_;
  std::atomic<double> now_{0.0};
  bool started_ = false;
  bool stopped_ = false;

  std::shared_ptr<RadioEnvironment> env_;
  AgentRegistry registry_;
  DataGateway gateway_;
  std::unique_ptr<SelectionEngine> engine_;
  std::unique_ptr<ManagementApi> api_;
  std::optional<std::uint16_t> api_port_;

  std::map<Ipv4Address, std::shared_ptr<Agent>> agents_;
  std::map<Ipv4Address, std::shared_ptr<LocalLink>> local_links_;
  std::unique_ptr<AgentServer> server_;
  std::map<Ipv4Address, std::unique_ptr<AgentEndpoint>> endpoints_;
};

}  // namespace sdwn
