#include "sdwn/agent.hpp"

#include <chrono>
#include <cmath>
#include <thread>

namespace sdwn {

double AirtimeTiers::per_packet(double rssi) const {
  if (rssi >= fast_threshold) return fast;
  if (rssi >= slow_threshold) return medium;
  return slow;
}

StaStats synthesize_stats(MacAddress sta, double rssi, double offered_load_pps, double t,
                          double window, const AirtimeTiers& tiers) {
  const double per_packet = tiers.per_packet(rssi);
  const auto offered = static_cast<std::int64_t>(std::floor(offered_load_pps * window));
  const auto fits = static_cast<std::int64_t>(std::floor(window / per_packet));
  StaStats stats;
  stats.sta = sta;
  stats.packet_count = std::max<std::int64_t>(0, std::min(offered, fits));
  stats.airtime = static_cast<double>(stats.packet_count) * per_packet;
  stats.avg_rssi = rssi;
  stats.window_start = t;
  stats.window_end = t + window;
  return stats;
}

Agent::Agent(ApId id, Channel channel, std::shared_ptr<RadioEnvironment> env,
             AgentOptions options)
    : id_(id), env_(std::move(env)), options_(std::move(options)), channel_(channel) {
  env_->set_ap_channel(id_.ip, channel_);
}

Channel Agent::channel() const {
  std::lock_guard lock(mutex_);
  return channel_;
}

void Agent::add_lvap(const Lvap& lvap) {
  if (lvap.host.ip != id_.ip) {
    throw ValidationError("LVAP host " + lvap.host.ip.to_string() + " is not this agent (" +
                          id_.ip.to_string() + ")");
  }
  std::lock_guard lock(mutex_);
  for (const auto& [sta, existing] : lvaps_) {
    if (existing.bssid == lvap.bssid && sta != lvap.sta) {
      throw ConflictError("bssid " + lvap.bssid.to_string() + " already serves station " +
                          sta.to_string());
    }
  }
  auto it = lvaps_.find(lvap.sta);
  if (it != lvaps_.end()) {
    if (it->second.bssid != lvap.bssid) {
      throw ConflictError("station " + lvap.sta.to_string() + " already hosted under bssid " +
                          it->second.bssid.to_string());
    }
    it->second = lvap;
  } else {
    lvaps_.emplace(lvap.sta, lvap);
  }
  env_->attach(lvap.sta, id_.ip);
}

void Agent::remove_lvap(MacAddress sta) {
  std::lock_guard lock(mutex_);
  if (lvaps_.erase(sta) > 0) env_->detach(sta, id_.ip);
}

void Agent::drop_all_lvaps() {
  std::lock_guard lock(mutex_);
  for (const auto& [sta, _] : lvaps_) env_->detach(sta, id_.ip);
  lvaps_.clear();
}

void Agent::set_channel(Channel channel) {
  std::lock_guard lock(mutex_);
  if (channel == channel_) return;
  channel_ = channel;
  env_->set_ap_channel(id_.ip, channel);
}

ScanReport Agent::perform_scan(Channel channel, double duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ValidationError("scan duration must be positive");
  }
  bool expected = false;
  if (!busy_.compare_exchange_strong(expected, true)) {
    throw BusyError(last_scan());
  }
  struct Release {
    std::atomic<bool>& flag;
    ~Release() { flag.store(false); }
  } release{busy_};

  const double t = env_->now();
  ScanReport report;
  report.ap = id_;
  report.channel = channel;
  report.timestamp = t;
  for (const auto sta : env_->stations()) {
    const auto rssi = env_->rssi_at(id_.ip, sta, channel, t);
    if (!rssi) continue;
    report.observations.push_back(
        {sta, *rssi, synthesize_stats(sta, *rssi, env_->offered_load(sta), t, duration)});
  }
  if (options_.realtime_scans) {
    std::this_thread::sleep_for(std::chrono::duration<double>(duration));
  }
  {
    std::lock_guard lock(mutex_);
    last_scan_ = report;
  }
  return report;
}

std::optional<ScanReport> Agent::last_scan() const {
  std::lock_guard lock(mutex_);
  return last_scan_;
}

std::vector<Lvap> Agent::lvaps() const {
  std::lock_guard lock(mutex_);
  std::vector<Lvap> out;
  for (const auto& [_, lvap] : lvaps_) out.push_back(lvap);
  return out;
}

bool Agent::hosts(MacAddress sta) const {
  std::lock_guard lock(mutex_);
  return lvaps_.contains(sta);
}

protocol::Hello Agent::hello() const {
  return {id_, channel(), options_.capabilities};
}

protocol::Message Agent::handle(const protocol::Message& request) {
  using protocol::Kind;
  try {
    switch (request.kind) {
      case Kind::kPing:
        return protocol::make_response(request, Kind::kPong);
      case Kind::kAddLvap:
        add_lvap(std::get<protocol::AddLvap>(request.payload).lvap);
        return protocol::make_response(request, Kind::kAck);
      case Kind::kRemoveLvap:
        remove_lvap(std::get<protocol::RemoveLvap>(request.payload).sta);
        return protocol::make_response(request, Kind::kAck);
      case Kind::kSetChannel:
        set_channel(std::get<protocol::SetChannel>(request.payload).channel);
        return protocol::make_response(request, Kind::kAck);
      case Kind::kScanRequest: {
        const auto& scan = std::get<protocol::ScanRequest>(request.payload);
        try {
          return protocol::make_response(request, Kind::kScanReport,
                                         protocol::ScanReportBody{perform_scan(scan.channel,
                                                                               scan.duration)});
        } catch (const BusyError& busy) {
          return protocol::make_response(request, Kind::kBusy, protocol::Busy{busy.last()});
        }
      }
      default:
        return protocol::make_error(request, "unsupported",
                                    "agent does not accept " +
                                        std::string(protocol::to_string(request.kind)));
    }
  } catch (const ConflictError& e) {
    return protocol::make_error(request, "conflict", e.what());
  } catch (const ValidationError& e) {
    return protocol::make_error(request, "validation", e.what());
  } catch (const NotFoundError& e) {
    return protocol::make_error(request, "not_found", e.what());
  }
}

}  // namespace sdwn
