#include "sdwn/runtime.hpp"

#include <thread>

namespace sdwn {

Transport transport_from_string(std::string_view text) {
  if (text == "local") return Transport::kLocal;
  if (text == "tcp") return Transport::kTcp;
  throw ValidationError("transport must be 'local' or 'tcp'");
}

Pacing pacing_from_string(std::string_view text) {
  if (text == "virtual") return Pacing::kVirtual;
  if (text == "realtime") return Pacing::kRealtime;
  throw ValidationError("pace must be 'virtual' or 'realtime'");
}

Runtime::Runtime(Scenario scenario, RuntimeOptions options)
    : scenario_(std::move(scenario)),
      options_(std::move(options)),
      registry_([this] { return now_.load(); }) {
  scenario_.validate();
  env_ = std::make_shared<RadioEnvironment>(scenario_.world, scenario_.radio,
                                            scenario_.ap_sites(), scenario_.station_sites());
  AgentOptions agent_options;
  agent_options.realtime_scans = options_.realtime_scans;
  for (const auto& ap : scenario_.aps) {
    agents_[ap.id.ip] = std::make_shared<Agent>(ap.id, ap.channel, env_, agent_options);
  }
  engine_ = std::make_unique<SelectionEngine>(
      registry_, gateway_, options_.log, scenario_.params,
      EngineOptions{scenario_.ssid, options_.request_timeout});
  api_ = std::make_unique<ManagementApi>(
      gateway_, registry_, options_.log, [this] { return now_.load(); },
      [this] { return engine_->iteration(); }, ApiOptions{options_.request_timeout});
}

Runtime::~Runtime() { shutdown(); }

void Runtime::connect_local(const std::shared_ptr<Agent>& agent) {
  auto link = std::make_shared<LocalLink>(agent);
  local_links_[agent->id().ip] = link;
  registry_.hello(agent->hello(), link);
}

void Runtime::start() {
  if (started_) throw Error("runtime already started");
  started_ = true;
  env_->set_time(0.0);

  if (options_.transport == Transport::kLocal) {
    for (const auto& [_, agent] : agents_) connect_local(agent);
  } else {
    server_ = std::make_unique<AgentServer>(registry_);
    const auto port = server_->start("127.0.0.1", 0);
    for (const auto& [ip, agent] : agents_) {
      endpoints_[ip] = std::make_unique<AgentEndpoint>(agent, "127.0.0.1", port);
      endpoints_[ip]->start();
    }
    if (!registry_.wait_for_connected(agents_.size(), options_.connect_timeout)) {
      throw Error("agents did not connect within the connect timeout");
    }
  }

  std::vector<Association> initial;
  for (const auto& sta : scenario_.stations) {
    if (sta.initial_ap && env_->station_present(sta.mac, 0.0)) {
      initial.push_back({sta.mac, *sta.initial_ap});
    }
  }
  engine_->initialize(0.0, initial);

  if (options_.api) api_port_ = api_->listen(options_.api->host, options_.api->port);
}

IterationSummary Runtime::step() {
  if (!started_ || stopped_) throw Error("runtime is not running");
  const double t = now_.load();
  env_->set_time(t);
  auto summary = engine_->run_iteration(t);
  now_.store(t + engine_->params().scan_interval);
  return summary;
}

std::vector<IterationSummary> Runtime::run_for(double duration, Pacing pacing) {
  std::vector<IterationSummary> out;
  const auto wall_origin = std::chrono::steady_clock::now();
  const double t_origin = now_.load();
  while (now_.load() < duration) {
    if (pacing == Pacing::kRealtime) {
      std::this_thread::sleep_until(
          wall_origin + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(now_.load() - t_origin)));
    }
    out.push_back(step());
  }
  if (options_.log) options_.log->flush();
  return out;
}

void Runtime::shutdown() {
  if (stopped_) return;
  stopped_ = true;
  if (api_) api_->stop();
  // The engine is driven by the caller's thread; nothing runs once step()
  // has returned.
  for (auto& [_, endpoint] : endpoints_) endpoint->stop();
  if (server_) server_->stop();
  for (auto& [_, link] : local_links_) link->close();
  if (options_.log) options_.log->flush();
}

std::shared_ptr<Agent> Runtime::agent(Ipv4Address ip) const {
  auto it = agents_.find(ip);
  if (it == agents_.end()) throw NotFoundError("unknown agent " + ip.to_string());
  return it->second;
}

std::shared_ptr<LocalLink> Runtime::local_link(Ipv4Address ip) const {
  auto it = local_links_.find(ip);
  if (it == local_links_.end() || !it->second->is_open()) return nullptr;
  return it->second;
}

void Runtime::disconnect_agent(Ipv4Address ip) {
  agent(ip);
  if (options_.transport == Transport::kLocal) {
    registry_.mark_disconnected(ip);
  } else {
    endpoints_.at(ip)->disconnect();
  }
}

void Runtime::reconnect_agent(Ipv4Address ip) {
  auto a = agent(ip);
  if (options_.transport == Transport::kLocal) connect_local(a);
}

}  // namespace sdwn
