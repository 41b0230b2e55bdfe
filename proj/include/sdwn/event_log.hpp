#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <string>
#include <vector>

#include "sdwn/types.hpp"

namespace sdwn {

/// Newline-delimited JSON event sink. Every event carries "event" (its type)
/// and "iteration" (the loop counter, non-decreasing through the file).
/// Fields prefixed "wall_" hold wall-clock measurements and are the only
/// ones allowed to differ between two runs with the same seed.
class EventLog {
 public:
  EventLog() = default;
  /// Appends to `path` (truncating it first).
  explicit EventLog(const std::filesystem::path& path);

  void set_keep_in_memory(bool keep);
  void emit(json event);
  void flush();

  std::vector<json> events() const;

 private:
  mutable std::mutex mutex_;
  std::ofstream file_;
  bool keep_ = false;
  std::vector<json> events_;
};

/// Drops every wall_* field, for comparing runs.
json strip_wall_fields(const json& event);

struct ReplayReport {
  std::vector<std::string> violations;  // "<invariant>: detail"
  std::vector<std::string> warnings;
  std::size_t events = 0;
  std::size_t iterations = 0;
  std::size_t handoffs = 0;

  bool ok() const { return violations.empty(); }
  /// Names of violated invariants, deduplicated.
  std::vector<std::string> violated() const;
};

/// Re-checks recorded runs offline:
///   single-host      - a station is hosted by at most two connected agents
///                      while a handoff is in flight and by exactly one once
///                      it returns and at every iteration boundary;
///   bssid-stability  - every event naming a station carries the same bssid;
///   loop-budget      - each iteration's wall time is below its scan interval;
///   iteration-order  - iteration counters never decrease;
///   malformed        - unparsable lines.
ReplayReport replay_check(std::istream& in);
ReplayReport replay_check(const std::vector<json>& events);
/// Throws NotFoundError when the file cannot be opened.
ReplayReport replay_check_file(const std::filesystem::path& path);

}  // namespace sdwn
