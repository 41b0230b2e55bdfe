#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sdwn/event_log.hpp"
#include "sdwn/gateway.hpp"
#include "sdwn/link.hpp"
#include "sdwn/selection.hpp"

namespace sdwn {

enum class HandoffOutcome {
  kCommitted,
  kCommittedWithWarning,  // target hosts the LVAP, source removal unconfirmed
  kFailed,                // target did not accept; station stays on source
  kRejected,              // invalid command, nothing sent
};

std::string_view to_string(HandoffOutcome outcome);

struct IterationSummary {
  std::uint64_t iteration = 0;
  double t = 0.0;
  double wall_ms = 0.0;
  double alpha = 0.0;  // alpha used by this iteration's matrix update
  std::size_t agents = 0;
  std::size_t reports = 0;
  std::size_t handoffs = 0;         // committed algorithm handoffs
  std::size_t manual_handoffs = 0;  // committed manual handoffs
  std::size_t failed_handoffs = 0;
  std::size_t joins = 0;
  std::size_t leaves = 0;
};

enum class Phase {
  kStart,            // after the iteration counter is bumped
  kScansCollected,   // reports in hand, matrix not yet updated
  kMatrixUpdated,
  kHandoffsDone,
  kPublished,        // gateway tables written, params not yet applied
  kParamsApplied,
};

struct EngineOptions {
  std::string ssid = "sdwn";
  std::chrono::milliseconds request_timeout{500};
};

/// The AP-selection control loop. Single logical thread: run_iteration and
/// execute_handoff must be called from one thread at a time. Everything
/// other threads need goes through the DataGateway.
class SelectionEngine {
 public:
  SelectionEngine(AgentRegistry& registry, DataGateway& gateway, EventLog* log,
                  Parameters params, EngineOptions options = {});

  /// Step 1: creates gateway tables (if needed), registers connected agents
  /// and places stations that start associated.
  void initialize(double now, std::span<const Association> initial = {});

  /// Steps 2-4 plus loop-boundary work:
  ///  start   - sync agent sessions, apply channel changes and manual handoffs
  ///  step 2  - SCAN_REQUEST every connected agent on its serving channel
  ///  step 3  - update the attenuation matrix
  ///  step 4  - compute the assignment, associate newcomers, run handoffs
  ///  end     - publish to the gateway, then apply queued parameter changes
  IterationSummary run_iteration(double now);

  /// ADD_LVAP on the target; only after its ACK, REMOVE_LVAP on the source.
  HandoffOutcome execute_handoff(const HandoffCommand& command);

  const Parameters& params() const { return params_; }
  const AttenuationMatrix& matrix() const { return matrix_; }
  const std::vector<ScanReport>& last_reports() const { return last_reports_; }
  Assignment assignment() const;
  std::optional<Lvap> lvap(MacAddress sta) const;
  std::uint64_t iteration() const { return iteration_.load(); }

  void set_phase_observer(std::function<void(Phase)> observer);

 private:
  enum class CallStatus { kOk, kUnreachable };
  struct CallResult {
    CallStatus status = CallStatus::kUnreachable;
    std::optional<protocol::Message> response;
    std::string error;
  };

  CallResult call(Ipv4Address ap, protocol::Message request, std::chrono::milliseconds timeout);
  void handle_unreachable(Ipv4Address ap, const std::string& reason);
  void notify(Phase phase);
  void emit(json event);

  void sync_agents();
  bool push_lvap(const Lvap& lvap);
  bool pull_lvap(Ipv4Address ap, MacAddress sta);
  bool associate(MacAddress sta, Ipv4Address ap);
  void disassociate(MacAddress sta);

  void apply_channel_changes();
  void apply_manual_handoffs(IterationSummary& summary);
  std::vector<ScanReport> collect_scans(double now);
  void apply_param_changes();
  void publish();
  json matrix_json() const;

  AgentRegistry& registry_;
  DataGateway& gateway_;
  EventLog* log_;
  Parameters params_;
  EngineOptions options_;

  std::atomic<std::uint64_t> iteration_{0};
  double now_ = 0.0;
  AttenuationMatrix matrix_;
  std::vector<ScanReport> last_reports_;
  std::map<MacAddress, Lvap> lvaps_;
  std::map<Ipv4Address, std::uint64_t> sessions_;  // ip -> generation we synced
  std::set<MacAddress> pinned_;  // manually placed this iteration

  struct Client {
    MacAddress bssid;
    double first_seen = 0.0;
    double last_seen = 0.0;
    bool connected = false;
  };
  std::map<MacAddress, Client> clients_;
  std::set<Ipv4Address> published_agents_;
  std::set<MacAddress> published_stations_;

  std::function<void(Phase)> observer_;
};

}  // namespace sdwn
