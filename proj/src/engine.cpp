#include "sdwn/engine.hpp"

#include <future>

namespace sdwn {

using protocol::Kind;

std::string_view to_string(HandoffOutcome outcome) {
  switch (outcome) {
    case HandoffOutcome::kCommitted: return "committed";
    case HandoffOutcome::kCommittedWithWarning: return "committed_with_warning";
    case HandoffOutcome::kFailed: return "failed";
    case HandoffOutcome::kRejected: return "rejected";
  }
  return "?";
}

SelectionEngine::SelectionEngine(AgentRegistry& registry, DataGateway& gateway, EventLog* log,
                                 Parameters params, EngineOptions options)
    : registry_(registry),
      gateway_(gateway),
      log_(log),
      params_(params),
      options_(std::move(options)) {
  params_.validate();
}

void SelectionEngine::set_phase_observer(std::function<void(Phase)> observer) {
  observer_ = std::move(observer);
}

void SelectionEngine::notify(Phase phase) {
  if (observer_) observer_(phase);
}

void SelectionEngine::emit(json event) {
  if (!log_) return;
  event["iteration"] = iteration_.load();
  log_->emit(std::move(event));
}

Assignment SelectionEngine::assignment() const {
  Assignment out;
  for (const auto& [sta, lvap] : lvaps_) out[sta] = lvap.host.ip;
  return out;
}

std::optional<Lvap> SelectionEngine::lvap(MacAddress sta) const {
  auto it = lvaps_.find(sta);
  if (it == lvaps_.end()) return std::nullopt;
  return it->second;
}

// Agent calls ----------------------------------------------------------------

SelectionEngine::CallResult SelectionEngine::call(Ipv4Address ap, protocol::Message request,
                                                  std::chrono::milliseconds timeout) {
  CallResult result;
  auto link = registry_.link(ap);
  if (!link) {
    result.error = "disconnected";
    return result;
  }
  try {
    result.response = link->call(std::move(request), timeout);
    result.status = CallStatus::kOk;
    registry_.touch(ap);
  } catch (const LinkTimeout&) {
    result.error = "timeout";
    handle_unreachable(ap, "timeout");
  } catch (const LinkError& e) {
    result.error = "closed";
    handle_unreachable(ap, "closed");
  }
  return result;
}

void SelectionEngine::handle_unreachable(Ipv4Address ap, const std::string& reason) {
  registry_.mark_disconnected(ap);
  if (sessions_.erase(ap) > 0) emit({{"event", "agent_down"}, {"ap", ap}, {"reason", reason}});
}

void SelectionEngine::sync_agents() {
  const auto connected = registry_.connected();
  std::map<Ipv4Address, std::uint64_t> live;
  for (const auto& info : connected) live[info.id.ip] = info.generation;

  for (auto it = sessions_.begin(); it != sessions_.end();) {
    auto l = live.find(it->first);
    if (l == live.end() || l->second != it->second) {
      emit({{"event", "agent_down"}, {"ap", it->first}, {"reason", "disconnected"}});
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& info : connected) {
    if (sessions_.contains(info.id.ip)) continue;
    sessions_[info.id.ip] = info.generation;
    emit({{"event", "agent_up"},
          {"ap", info.id.ip},
          {"mac", info.id.mac},
          {"channel", info.channel},
          {"generation", info.generation}});
    // A fresh session starts with an empty LVAP table; restore ours.
    for (const auto& [sta, lvap] : lvaps_) {
      if (lvap.host.ip != info.id.ip) continue;
      Lvap updated = lvap;
      updated.host = info.id;
      if (!push_lvap(updated)) break;
    }
  }
}

bool SelectionEngine::push_lvap(const Lvap& lvap) {
  auto result = call(lvap.host.ip, protocol::make_request(Kind::kAddLvap, protocol::AddLvap{lvap}),
                     options_.request_timeout);
  const bool ok = result.status == CallStatus::kOk && result.response->kind == Kind::kAck;
  json event = {{"event", "lvap_add"},
                {"sta", lvap.sta},
                {"bssid", lvap.bssid},
                {"ap", lvap.host.ip},
                {"ok", ok}};
  if (!ok) {
    event["error"] = result.status == CallStatus::kOk
                         ? std::get<protocol::ErrorBody>(result.response->payload).code
                         : result.error;
  }
  emit(std::move(event));
  return ok;
}

bool SelectionEngine::pull_lvap(Ipv4Address ap, MacAddress sta) {
  auto result = call(ap, protocol::make_request(Kind::kRemoveLvap, protocol::RemoveLvap{sta}),
                     options_.request_timeout);
  const bool ok = result.status == CallStatus::kOk && result.response->kind == Kind::kAck;
  json event = {{"event", "lvap_remove"}, {"sta", sta}, {"ap", ap}, {"ok", ok}};
  if (!ok) event["error"] = result.status == CallStatus::kOk ? "rejected" : result.error;
  emit(std::move(event));
  return ok;
}

bool SelectionEngine::associate(MacAddress sta, Ipv4Address ap) {
  auto info = registry_.find(ap);
  if (!info || !info->connected) return false;
  const Lvap lvap{sta, derive_bssid(sta), options_.ssid, info->id};
  const bool ok = push_lvap(lvap);
  emit({{"event", "associate"}, {"sta", sta}, {"bssid", lvap.bssid}, {"ap", ap}, {"ok", ok}});
  if (!ok) return false;
  lvaps_[sta] = lvap;
  auto [client, fresh] = clients_.try_emplace(sta);
  if (fresh) client->second.first_seen = now_;
  client->second.bssid = lvap.bssid;
  client->second.last_seen = now_;
  client->second.connected = true;
  return true;
}

void SelectionEngine::disassociate(MacAddress sta) {
  auto it = lvaps_.find(sta);
  if (it == lvaps_.end()) return;
  const auto lvap = it->second;
  if (registry_.link(lvap.host.ip)) pull_lvap(lvap.host.ip, sta);
  lvaps_.erase(it);
  emit({{"event", "disassociate"}, {"sta", sta}, {"bssid", lvap.bssid}, {"ap", lvap.host.ip}});
  if (auto c = clients_.find(sta); c != clients_.end()) c->second.connected = false;
}

HandoffOutcome SelectionEngine::execute_handoff(const HandoffCommand& command) {
  auto log_result = [&](HandoffOutcome outcome, const Lvap* lvap, const std::string& note) {
    json event = {{"event", "handoff"},
                  {"sta", command.sta},
                  {"source", command.source},
                  {"target", command.target},
                  {"reason", to_string(command.reason)},
                  {"result", to_string(outcome)}};
    if (lvap) event["bssid"] = lvap->bssid;
    if (!note.empty()) event["note"] = note;
    emit(std::move(event));
    return outcome;
  };

  auto it = lvaps_.find(command.sta);
  if (it == lvaps_.end()) return log_result(HandoffOutcome::kRejected, nullptr, "not associated");
  const Lvap current = it->second;
  if (command.source == command.target) {
    return log_result(HandoffOutcome::kRejected, &current, "source equals target");
  }
  if (current.host.ip != command.source) {
    return log_result(HandoffOutcome::kRejected, &current, "source is not the current host");
  }
  auto target = registry_.find(command.target);
  if (!target || !target->connected || !registry_.link(command.target)) {
    return log_result(HandoffOutcome::kFailed, &current, "target not connected");
  }

  Lvap moved = current;
  moved.host = target->id;
  if (!push_lvap(moved)) return log_result(HandoffOutcome::kFailed, &current, "target refused");

  // Target is authoritative from here on.
  it->second = moved;
  bool removed = false;
  if (registry_.link(command.source)) removed = pull_lvap(command.source, command.sta);
  if (removed) return log_result(HandoffOutcome::kCommitted, &moved, "");
  return log_result(HandoffOutcome::kCommittedWithWarning, &moved, "source removal unconfirmed");
}

// Loop -----------------------------------------------------------------------

void SelectionEngine::initialize(double now, std::span<const Association> initial) {
  now_ = now;
  if (!gateway_.initialized()) gateway_.init(params_, now);
  emit({{"event", "init"}, {"t", now}, {"params", params_}});
  sync_agents();
  for (const auto& a : initial) {
    if (!lvaps_.contains(a.sta)) associate(a.sta, a.ap);
  }
  publish();
}

void SelectionEngine::apply_channel_changes() {
  for (const auto& change : gateway_.channel_queue().drain()) {
    auto result = call(change.ap,
                       protocol::make_request(Kind::kSetChannel, protocol::SetChannel{change.channel}),
                       options_.request_timeout);
    const bool ok = result.status == CallStatus::kOk && result.response->kind == Kind::kAck;
    if (ok) registry_.set_channel(change.ap, change.channel);
    emit({{"event", "channel_change"}, {"ap", change.ap}, {"channel", change.channel}, {"ok", ok}});
  }
}

void SelectionEngine::apply_manual_handoffs(IterationSummary& summary) {
  for (const auto& request : gateway_.handoff_queue().drain()) {
    auto it = lvaps_.find(request.sta);
    HandoffCommand command{request.sta, it == lvaps_.end() ? Ipv4Address{} : it->second.host.ip,
                           request.target, HandoffReason::kManual};
    const auto outcome = execute_handoff(command);
    if (outcome == HandoffOutcome::kCommitted || outcome == HandoffOutcome::kCommittedWithWarning) {
      ++summary.manual_handoffs;
      pinned_.insert(request.sta);
    } else if (outcome == HandoffOutcome::kFailed) {
      ++summary.failed_handoffs;
    }
  }
}

std::vector<ScanReport> SelectionEngine::collect_scans(double now) {
  const auto agents = registry_.connected();
  const auto timeout = options_.request_timeout +
                       std::chrono::milliseconds(static_cast<long>(params_.scan_duration * 1000.0));

  struct Pending {
    Ipv4Address ap;
    std::shared_ptr<AgentLink> link;
    std::future<protocol::Message> reply;
  };
  std::vector<Pending> pending;
  for (const auto& info : agents) {
    auto link = registry_.link(info.id.ip);
    if (!link) continue;
    auto request = protocol::make_request(
        Kind::kScanRequest, protocol::ScanRequest{info.channel, params_.scan_duration});
    pending.push_back({info.id.ip, link, std::async(std::launch::async, [link, request, timeout] {
                         return link->call(request, timeout);
                       })});
  }

  std::vector<ScanReport> reports;
  for (auto& p : pending) {  // ascending ip
    try {
      auto response = p.reply.get();
      registry_.touch(p.ap);
      if (response.kind == Kind::kScanReport) {
        reports.push_back(std::get<protocol::ScanReportBody>(response.payload).report);
      } else if (response.kind == Kind::kBusy) {
        // An out-of-band scan at this same instant is as good as ours.
        const auto& last = std::get<protocol::Busy>(response.payload).last;
        if (last && last->timestamp >= now) reports.push_back(*last);
      }
    } catch (const LinkTimeout&) {
      handle_unreachable(p.ap, "timeout");
    } catch (const LinkError&) {
      handle_unreachable(p.ap, "closed");
    }
  }
  return reports;
}

void SelectionEngine::apply_param_changes() {
  for (const auto& change : gateway_.drain_param_changes()) {
    bool ok = true;
    std::string error;
    try {
      params_.set(change.name, change.value);
    } catch (const ValidationError& e) {
      ok = false;
      error = e.what();
    }
    json event = {{"event", "param_change"}, {"name", change.name}, {"value", change.value},
                  {"ok", ok}};
    if (!ok) event["error"] = error;
    emit(std::move(event));
  }
  gateway_.put(tables::kParams, "applied", json(params_));
}

json SelectionEngine::matrix_json() const {
  std::set<Ipv4Address> aps;
  for (const auto& info : registry_.connected()) aps.insert(info.id.ip);
  for (const auto ap : matrix_.aps()) aps.insert(ap);
  json cells = json::array();
  for (const auto& [key, cell] : matrix_.cells) {
    cells.push_back(
        {{"ap", key.first}, {"sta", key.second}, {"rssi", cell.rssi}, {"staleness", cell.staleness}});
  }
  return {{"aps", json(std::vector<Ipv4Address>(aps.begin(), aps.end()))},
          {"stas", json(matrix_.stations())},
          {"cells", std::move(cells)},
          {"timestamp", matrix_.timestamp}};
}

void SelectionEngine::publish() {
  gateway_.put(tables::kMatrix, "current", matrix_json());

  for (const auto& report : last_reports_) {
    const auto key = report.ap.ip.to_string();
    gateway_.put(tables::kLastScans, key, json(report));
    json stations = json::array();
    for (const auto& obs : report.observations) {
      const auto* cell = matrix_.find(report.ap.ip, obs.sta);
      stations.push_back({{"mac", obs.sta},
                          {"packets", obs.stats.packet_count},
                          {"airtime", obs.stats.airtime},
                          {"rssi", obs.stats.avg_rssi},
                          {"smoothed_rssi", cell ? json(cell->rssi) : json(nullptr)},
                          {"window", {obs.stats.window_start, obs.stats.window_end}}});
    }
    gateway_.put(tables::kStats, key,
                 {{"ap", key}, {"timestamp", report.timestamp}, {"stations", std::move(stations)}});
  }

  std::map<Ipv4Address, std::int64_t> hosted;
  for (const auto& [_, lvap] : lvaps_) ++hosted[lvap.host.ip];
  std::set<Ipv4Address> agents_now;
  for (const auto& info : registry_.connected()) {
    agents_now.insert(info.id.ip);
    gateway_.put(tables::kAgents, info.id.ip.to_string(),
                 {{"ip", info.id.ip},
                  {"mac", info.id.mac},
                  {"channel", info.channel},
                  {"lvaps", hosted[info.id.ip]},
                  {"last_heartbeat", info.last_heartbeat}});
  }
  for (const auto ip : published_agents_) {
    if (!agents_now.contains(ip)) gateway_.erase(tables::kAgents, ip.to_string());
  }
  published_agents_ = std::move(agents_now);

  // Clients before stations keeps stations_current a subset of clients_ever.
  for (const auto& [sta, client] : clients_) {
    gateway_.put(tables::kClientsEver, sta.to_string(),
                 {{"mac", sta},
                  {"bssid", client.bssid},
                  {"first_seen", client.first_seen},
                  {"last_seen", client.last_seen},
                  {"connected", client.connected}});
  }
  std::set<MacAddress> stations_now;
  for (const auto& [sta, lvap] : lvaps_) {
    stations_now.insert(sta);
    const auto* cell = matrix_.find(lvap.host.ip, sta);
    gateway_.put(tables::kStationsCurrent, sta.to_string(),
                 {{"mac", sta},
                  {"bssid", lvap.bssid},
                  {"host", lvap.host.ip},
                  {"rssi", cell ? json(cell->rssi) : json(nullptr)}});
  }
  for (const auto sta : published_stations_) {
    if (!stations_now.contains(sta)) gateway_.erase(tables::kStationsCurrent, sta.to_string());
  }
  published_stations_ = std::move(stations_now);
}

IterationSummary SelectionEngine::run_iteration(double now) {
  const auto wall_start = std::chrono::steady_clock::now();
  IterationSummary summary;
  summary.iteration = ++iteration_;
  summary.t = now_ = now;
  summary.alpha = params_.alpha;
  pinned_.clear();
  notify(Phase::kStart);

  sync_agents();
  apply_channel_changes();
  apply_manual_handoffs(summary);

  last_reports_ = collect_scans(now);
  summary.reports = last_reports_.size();
  notify(Phase::kScansCollected);

  matrix_ = update_matrix(matrix_, last_reports_, params_, now);
  notify(Phase::kMatrixUpdated);

  for (const auto& report : last_reports_) {
    for (const auto& obs : report.observations) {
      if (auto c = clients_.find(obs.sta); c != clients_.end()) c->second.last_seen = now;
    }
  }

  // Stations no AP hears any more have left.
  std::vector<MacAddress> gone;
  for (const auto& [sta, _] : lvaps_) {
    if (!matrix_.has_station(sta)) gone.push_back(sta);
  }
  for (const auto sta : gone) disassociate(sta);
  summary.leaves = gone.size();

  // Manually placed stations keep their host for the rest of this iteration.
  AttenuationMatrix view = matrix_;
  for (const auto sta : pinned_) {
    auto host = lvaps_.find(sta);
    if (host == lvaps_.end()) continue;
    std::erase_if(view.cells, [&](const auto& entry) {
      return entry.first.second == sta && entry.first.first != host->second.host.ip;
    });
  }

  std::vector<Ipv4Address> connected;
  for (const auto& info : registry_.connected()) connected.push_back(info.id.ip);
  summary.agents = connected.size();

  const auto plan = compute_assignment(view, assignment(), connected, params_);
  for (const auto& join : plan.joins) {
    if (associate(join.sta, join.ap)) ++summary.joins;
  }
  for (const auto& command : plan.handoffs) {
    const auto outcome = execute_handoff(command);
    if (outcome == HandoffOutcome::kCommitted || outcome == HandoffOutcome::kCommittedWithWarning) {
      ++summary.handoffs;
    } else if (outcome == HandoffOutcome::kFailed) {
      ++summary.failed_handoffs;
    }
  }
  notify(Phase::kHandoffsDone);

  publish();
  notify(Phase::kPublished);

  apply_param_changes();
  notify(Phase::kParamsApplied);

  summary.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start)
          .count();

  json cells = json::array();
  for (const auto& [key, cell] : matrix_.cells) {
    cells.push_back(
        {{"ap", key.first}, {"sta", key.second}, {"rssi", cell.rssi}, {"staleness", cell.staleness}});
  }
  emit({{"event", "matrix"}, {"t", now}, {"cells", std::move(cells)}});
  emit({{"event", "iteration"},
        {"t", now},
        {"wall_ms", summary.wall_ms},
        {"scan_interval", params_.scan_interval},
        {"alpha", summary.alpha},
        {"agents", summary.agents},
        {"reports", summary.reports},
        {"handoffs", summary.handoffs},
        {"manual_handoffs", summary.manual_handoffs},
        {"failed_handoffs", summary.failed_handoffs},
        {"joins", summary.joins},
        {"leaves", summary.leaves}});
  return summary;
}

}  // namespace sdwn
