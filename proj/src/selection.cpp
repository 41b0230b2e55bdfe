#include "sdwn/selection.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace sdwn {

const MatrixCell* AttenuationMatrix::find(Ipv4Address ap, MacAddress sta) const {
  auto it = cells.find({ap, sta});
  return it == cells.end() ? nullptr : &it->second;
}

std::vector<Ipv4Address> AttenuationMatrix::aps() const {
  std::set<Ipv4Address> out;
  for (const auto& [key, _] : cells) out.insert(key.first);
  return {out.begin(), out.end()};
}

std::vector<MacAddress> AttenuationMatrix::stations() const {
  std::set<MacAddress> out;
  for (const auto& [key, _] : cells) out.insert(key.second);
  return {out.begin(), out.end()};
}

bool AttenuationMatrix::has_station(MacAddress sta) const {
  return std::any_of(cells.begin(), cells.end(),
                     [&](const auto& entry) { return entry.first.second == sta; });
}

AttenuationMatrix update_matrix(const AttenuationMatrix& matrix,
                                std::span<const ScanReport> reports, const Parameters& params,
                                double now) {
  AttenuationMatrix next;
  next.timestamp = now;

  std::set<AttenuationMatrix::Key> observed;
  next.cells = matrix.cells;
  for (const auto& report : reports) {
    for (const auto& obs : report.observations) {
      const AttenuationMatrix::Key key{report.ap.ip, obs.sta};
      auto it = next.cells.find(key);
      if (it == next.cells.end()) {
        next.cells.emplace(key, MatrixCell{obs.raw_rssi, 0});
      } else {
        it->second.rssi = smooth_rssi(params.alpha, obs.raw_rssi, it->second.rssi);
        it->second.staleness = 0;
      }
      observed.insert(key);
    }
  }

  for (auto it = next.cells.begin(); it != next.cells.end();) {
    if (!observed.contains(it->first) && ++it->second.staleness >= params.stale_scans_limit) {
      it = next.cells.erase(it);
    } else {
      ++it;
    }
  }
  return next;
}

std::string_view to_string(HandoffReason reason) {
  return reason == HandoffReason::kManual ? "manual" : "algorithm";
}

AssignmentPlan compute_assignment(const AttenuationMatrix& matrix, const Assignment& current,
                                  std::span<const Ipv4Address> connected,
                                  const Parameters& params) {
  constexpr double kNone = -std::numeric_limits<double>::infinity();

  AssignmentPlan plan;
  plan.next = current;

  std::vector<Ipv4Address> aps(connected.begin(), connected.end());
  std::sort(aps.begin(), aps.end());
  aps.erase(std::unique(aps.begin(), aps.end()), aps.end());

  std::set<MacAddress> stations;
  for (const auto& [sta, _] : current) stations.insert(sta);
  for (const auto sta : matrix.stations()) stations.insert(sta);

  auto load_excluding = [&](Ipv4Address ap, MacAddress sta) {
    std::size_t n = 0;
    for (const auto& [other, host] : plan.next) n += (host == ap && other != sta) ? 1 : 0;
    return static_cast<double>(n);
  };
  auto score = [&](Ipv4Address ap, MacAddress sta) {
    if (!std::binary_search(aps.begin(), aps.end(), ap)) return kNone;
    const auto* cell = matrix.find(ap, sta);
    if (!cell) return kNone;
    return cell->rssi - params.load_penalty_beta * load_excluding(ap, sta);
  };

  for (const auto sta : stations) {
    std::optional<Ipv4Address> best;
    double best_score = kNone;
    for (const auto ap : aps) {  // ascending ip: strict '>' keeps the lowest on ties
      const double s = score(ap, sta);
      if (s > best_score) {
        best = ap;
        best_score = s;
      }
    }
    if (!best) continue;

    auto host = plan.next.find(sta);
    if (host == plan.next.end()) {
      plan.next[sta] = *best;
      plan.joins.push_back({sta, *best});
      continue;
    }
    if (*best == host->second) continue;
    const double current_score = score(host->second, sta);
    if (best_score - current_score > params.hysteresis) {
      plan.handoffs.push_back({sta, host->second, *best, HandoffReason::kAlgorithm});
      host->second = *best;
    }
  }
  return plan;
}

}  // namespace sdwn
