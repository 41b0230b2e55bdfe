#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "sdwn/protocol.hpp"
#include "sdwn/radio.hpp"

namespace sdwn {

/// Thrown by Agent::perform_scan while another scan is running. Carries the
/// cached result of the previous scan, when there is one.
class BusyError : public Error {
 public:
  explicit BusyError(std::optional<ScanReport> last)
      : Error("agent is already scanning"), last_(std::move(last)) {}
  const std::optional<ScanReport>& last() const { return last_; }

 private:
  std::optional<ScanReport> last_;
};

// Per-packet airtime by modulation tier.
struct AirtimeTiers {
  double fast_threshold = -65.0;  // dBm, at or above: fast tier
  double slow_threshold = -78.0;  // dBm, below: slow tier
  double fast = 0.00025;          // seconds per packet
  double medium = 0.0015;
  double slow = 0.006;

  double per_packet(double rssi) const;
};

/// Traffic statistics an agent would measure for one station over
/// [t, t + window). Packet count follows the station's offered load, capped
/// by how many packets fit in the window at the tier's per-packet airtime.
StaStats synthesize_stats(MacAddress sta, double rssi, double offered_load_pps, double t,
                          double window, const AirtimeTiers& tiers = {});

struct AgentOptions {
  /// Sleep for the scan duration in wall-clock time. Off for virtual-time
  /// runs; on when overlapping scans must be observable.
  bool realtime_scans = false;
  std::vector<std::string> capabilities = {"lvap", "scan", "channel"};
};

/// Simulated access point. Hosts LVAPs, serves one channel, scans and
/// answers control-protocol requests. All methods are thread-safe; table
/// commands are serialized, a scan runs outside the command lock guarded by
/// a busy flag.
class Agent {
 public:
  Agent(ApId id, Channel channel, std::shared_ptr<RadioEnvironment> env,
        AgentOptions options = {});

  const ApId& id() const { return id_; }
  Channel channel() const;

  /// Idempotent. Throws ConflictError if another station already holds the
  /// same bssid, or this station is hosted under a different bssid.
  void add_lvap(const Lvap& lvap);
  /// Idempotent.
  void remove_lvap(MacAddress sta);
  void set_channel(Channel channel);
  /// Throws BusyError when a scan is already running.
  ScanReport perform_scan(Channel channel, double duration);

  std::optional<ScanReport> last_scan() const;
  std::vector<Lvap> lvaps() const;
  bool hosts(MacAddress sta) const;
  bool scanning() const { return busy_.load(); }

  /// Controller link lost: LVAPs are controller state and are dropped.
  void drop_all_lvaps();

  protocol::Hello hello() const;
  /// Dispatches one request to the matching operation and builds its
  /// terminal response (seq left 0 for the transport to assign).
  protocol::Message handle(const protocol::Message& request);

 private:
  ApId id_;
  std::shared_ptr<RadioEnvironment> env_;
  AgentOptions options_;

  mutable std::mutex mutex_;
  Channel channel_;
  std::map<MacAddress, Lvap> lvaps_;
  std::optional<ScanReport> last_scan_;

  std::atomic<bool> busy_{false};
};

}  // namespace sdwn
