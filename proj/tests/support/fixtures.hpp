#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sdwn/scenario.hpp"

namespace sdwn::testing {

MacAddress sta_mac(int index);    // 00:16:3e:00:00:<index>
Ipv4Address ap_ip(int index);     // 10.0.0.<index>
MacAddress ap_mac(int index);     // 02:00:0a:00:00:<index>

ScenarioAp make_ap(int index, Position position, int channel = 1);
ScenarioStation parked(int index, Position position, std::optional<int> initial_ap = std::nullopt);
ScenarioStation walking(int index, Position from, Position to, double speed,
                        std::optional<int> initial_ap = std::nullopt);

/// 60 x 20 m world, noise sigma as given, default parameters.
Scenario empty_scenario(double noise_sigma = 0.0, std::uint64_t seed = 1);

/// Two APs 40 m apart on a horizontal line (y = 10), both on channel 1.
Scenario corridor(double noise_sigma = 0.0, std::uint64_t seed = 1);
inline constexpr Position kCorridorA{10.0, 10.0};
inline constexpr Position kCorridorB{50.0, 10.0};

/// Unique path in the temp directory (not created).
std::filesystem::path temp_path(const std::string& stem);

std::filesystem::path source_path(const std::string& relative);

}  // namespace sdwn::testing
