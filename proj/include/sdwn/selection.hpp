#pragma once

#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "sdwn/params.hpp"
#include "sdwn/types.hpp"

// Pure pieces of the AP-selection loop: RSSI smoothing, the attenuation
// matrix update and the assignment rule. No I/O, no clocks.

namespace sdwn {

/// alpha * new + (1 - alpha) * historic.
constexpr double smooth_rssi(double alpha, double new_rssi, double historic) {
  return alpha * new_rssi + (1.0 - alpha) * historic;
}

struct MatrixCell {
  double rssi = 0.0;   // smoothed, dBm
  int staleness = 0;   // scans since the last observation

  bool operator==(const MatrixCell&) const = default;
};

/// AP x station table of smoothed RSSI. A cell exists only once the pair has
/// been observed and is evicted after stale_scans_limit silent updates.
struct AttenuationMatrix {
  using Key = std::pair<Ipv4Address, MacAddress>;

  std::map<Key, MatrixCell> cells;
  double timestamp = 0.0;

  const MatrixCell* find(Ipv4Address ap, MacAddress sta) const;
  std::vector<Ipv4Address> aps() const;
  std::vector<MacAddress> stations() const;
  bool has_station(MacAddress sta) const;

  bool operator==(const AttenuationMatrix&) const = default;
};

/// Folds one iteration's scan reports into `matrix`. New pairs start at the
/// raw sample; observed pairs are smoothed; silent pairs age and are evicted
/// when staleness reaches params.stale_scans_limit.
AttenuationMatrix update_matrix(const AttenuationMatrix& matrix,
                                std::span<const ScanReport> reports, const Parameters& params,
                                double now);

using Assignment = std::map<MacAddress, Ipv4Address>;

enum class HandoffReason { kAlgorithm, kManual };
std::string_view to_string(HandoffReason reason);

struct HandoffCommand {
  MacAddress sta;
  Ipv4Address source;
  Ipv4Address target;
  HandoffReason reason = HandoffReason::kAlgorithm;

  bool operator==(const HandoffCommand&) const = default;
};

/// First association of a station that has no LVAP yet.
struct Association {
  MacAddress sta;
  Ipv4Address ap;

  bool operator==(const Association&) const = default;
};

struct AssignmentPlan {
  Assignment next;
  std::vector<HandoffCommand> handoffs;
  std::vector<Association> joins;

  bool operator==(const AssignmentPlan&) const = default;
};

/// Greedy assignment with a per-station load penalty and hysteresis.
///
/// Stations are visited in ascending MAC order. For each one every connected
/// AP with a matrix cell is scored as
///
///   rssi(ap, sta) - beta * (stations tentatively on ap, excluding sta)
///
/// using the assignment as it evolves during the pass. The best AP wins, ties
/// going to the lowest IPv4. An associated station moves only if the winner
/// beats its current AP by more than the hysteresis; a current AP that is
/// disconnected or has no cell scores -infinity. Unassociated stations with
/// cells join their best AP directly. Stations without cells stay put.
AssignmentPlan compute_assignment(const AttenuationMatrix& matrix, const Assignment& current,
                                  std::span<const Ipv4Address> connected,
                                  const Parameters& params);

}  // namespace sdwn
