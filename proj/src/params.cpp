#include "sdwn/params.hpp"

#include <cmath>

namespace sdwn {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

void Parameters::validate() const {
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(std::isfinite(scan_interval) && scan_interval > 0.0,
          "scan_interval must be positive");
  require(scan_interval <= kMaxScanInterval, "scan_interval must not exceed 2 s");
  require(std::isfinite(hysteresis) && hysteresis >= 0.0, "hysteresis must be >= 0");
  require(std::isfinite(load_penalty_beta) && load_penalty_beta >= 0.0,
          "load_penalty_beta must be >= 0");
  require(stale_scans_limit >= 1, "stale_scans_limit must be >= 1");
  require(std::isfinite(scan_duration) && scan_duration > 0.0,
          "scan_duration must be positive");
  require(scan_duration < scan_interval, "scan_duration must be shorter than scan_interval");
}

const std::vector<std::string>& Parameters::names() {
  static const std::vector<std::string> kNames = {
      "alpha", "scan_interval", "hysteresis", "load_penalty_beta", "stale_scans_limit",
      "scan_duration"};
  return kNames;
}

double Parameters::get(std::string_view name) const {
  if (name == "alpha") return alpha;
  if (name == "scan_interval") return scan_interval;
  if (name == "hysteresis") return hysteresis;
  if (name == "load_penalty_beta") return load_penalty_beta;
  if (name == "stale_scans_limit") return stale_scans_limit;
  if (name == "scan_duration") return scan_duration;
  throw ValidationError("unknown parameter '" + std::string(name) + "'");
}

namespace {

// Field assignment without cross-field validation.
void assign(Parameters& next, std::string_view name, double value) {
  if (name == "alpha") {
    next.alpha = value;
  } else if (name == "scan_interval") {
    next.scan_interval = value;
  } else if (name == "hysteresis") {
    next.hysteresis = value;
  } else if (name == "load_penalty_beta") {
    next.load_penalty_beta = value;
  } else if (name == "stale_scans_limit") {
    if (!std::isfinite(value) || std::floor(value) != value || value > 1e6) {
      throw ValidationError("stale_scans_limit must be an integer");
    }
    next.stale_scans_limit = static_cast<int>(value);
  } else if (name == "scan_duration") {
    next.scan_duration = value;
  } else {
    throw ValidationError("unknown parameter '" + std::string(name) + "'");
  }
}

}  // namespace

void Parameters::set(std::string_view name, double value) {
  Parameters next = *this;
  assign(next, name, value);
  next.validate();
  *this = next;
}

void validate_param_change(const Parameters& base, const ParamChange& change) {
  Parameters copy = base;
  copy.set(change.name, change.value);
}

void to_json(json& j, const Parameters& p) {
  j = json{{"alpha", p.alpha},
           {"scan_interval", p.scan_interval},
           {"hysteresis", p.hysteresis},
           {"load_penalty_beta", p.load_penalty_beta},
           {"stale_scans_limit", p.stale_scans_limit},
           {"scan_duration", p.scan_duration}};
}

void from_json(const json& j, Parameters& p) {
  if (!j.is_object()) throw ValidationError("params must be an object");
  Parameters out;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ValidationError("params." + key + " must be a number");
    assign(out, key, value.get<double>());
  }
  out.validate();
  p = out;
}

void to_json(json& j, const ParamChange& c) {
  j = json{{"name", c.name}, {"value", c.value}, {"requested_at", c.requested_at}};
}

}  // namespace sdwn
