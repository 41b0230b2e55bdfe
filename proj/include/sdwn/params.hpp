#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sdwn/types.hpp"

namespace sdwn {

/// Runtime-tunable configuration of the selection loop. Mutated only at loop
/// boundaries.
struct Parameters {
  double alpha = 0.8;               // smoothing weight of the newest sample
  double scan_interval = 1.0;       // seconds, loop period
  double hysteresis = 6.0;          // dB
  double load_penalty_beta = 3.0;   // dB per station
  int stale_scans_limit = 3;
  double scan_duration = 0.060;     // seconds per channel scan

  static constexpr double kMaxScanInterval = 2.0;

  /// Throws ValidationError naming the offending field.
  void validate() const;

  /// Sets one field by name; validates the whole record afterwards and leaves
  /// *this untouched on failure.
  void set(std::string_view name, double value);
  double get(std::string_view name) const;

  static const std::vector<std::string>& names();

  bool operator==(const Parameters&) const = default;
};

/// A queued request to change one parameter.
struct ParamChange {
  std::string name;
  double value = 0.0;
  double requested_at = 0.0;

  bool operator==(const ParamChange&) const = default;
};

/// Validates `change` against `base` (the field must exist and the resulting
/// record must be valid).
void validate_param_change(const Parameters& base, const ParamChange& change);

void to_json(json& j, const Parameters& p);
void from_json(const json& j, Parameters& p);
void to_json(json& j, const ParamChange& c);

}  // namespace sdwn
