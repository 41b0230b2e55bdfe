#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sdwn/params.hpp"
#include "sdwn/radio.hpp"

namespace sdwn {

struct ScenarioAp {
  ApId id;
  Position position;
  Channel channel;
};

struct ScenarioStation {
  MacAddress mac;
  std::vector<Waypoint> track;
  double offered_load_pps = 100.0;
  std::optional<Ipv4Address> initial_ap;
  std::optional<double> join_time;
  std::optional<double> leave_time;
};

/// A desk-scale WLAN: world, radio model, APs, stations and initial loop
/// parameters. See docs/scenario.md for the file schema.
struct Scenario {
  std::string name = "scenario";
  std::string ssid = "sdwn";
  WorldBounds world;
  RadioModel radio;
  Parameters params;
  std::vector<ScenarioAp> aps;
  std::vector<ScenarioStation> stations;

  /// Throws ValidationError whose message starts with the offending field
  /// path, e.g. "aps[1].ip: duplicate AP ip 10.0.0.1".
  void validate() const;

  std::vector<ApSite> ap_sites() const;
  std::vector<StationSite> station_sites() const;
};

Scenario parse_scenario(const json& document);
Scenario parse_scenario_text(const std::string& text);
/// Throws NotFoundError when the file cannot be opened.
Scenario load_scenario(const std::filesystem::path& path);

json scenario_to_json(const Scenario& scenario);

}  // namespace sdwn
