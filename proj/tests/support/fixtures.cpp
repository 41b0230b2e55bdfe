#include "fixtures.hpp"

#include <atomic>
#include <unistd.h>

namespace sdwn::testing {

MacAddress sta_mac(int index) {
  return MacAddress(0x00163e000000ull | static_cast<std::uint64_t>(index));
}

Ipv4Address ap_ip(int index) { return Ipv4Address(0x0a000000u | static_cast<std::uint32_t>(index)); }

MacAddress ap_mac(int index) {
  return MacAddress(0x02000a000000ull | static_cast<std::uint64_t>(index));
}

ScenarioAp make_ap(int index, Position position, int channel) {
  return {{ap_ip(index), ap_mac(index)}, position, Channel(channel)};
}

ScenarioStation parked(int index, Position position, std::optional<int> initial_ap) {
  ScenarioStation s;
  s.mac = sta_mac(index);
  s.track = {{position, 0.0}};
  if (initial_ap) s.initial_ap = ap_ip(*initial_ap);
  return s;
}

ScenarioStation walking(int index, Position from, Position to, double speed,
                        std::optional<int> initial_ap) {
  ScenarioStation s = parked(index, from, initial_ap);
  s.track.push_back({to, distance(from, to) / speed});
  return s;
}

Scenario empty_scenario(double noise_sigma, std::uint64_t seed) {
  Scenario s;
  s.name = "test";
  s.world = {60.0, 20.0};
  s.radio.noise_sigma = noise_sigma;
  s.radio.seed = seed;
  return s;
}

Scenario corridor(double noise_sigma, std::uint64_t seed) {
  Scenario s = empty_scenario(noise_sigma, seed);
  s.name = "corridor";
  s.aps = {make_ap(1, kCorridorA, 1), make_ap(2, kCorridorB, 1)};
  return s;
}

std::filesystem::path temp_path(const std::string& stem) {
  static std::atomic<int> counter{0};
  return std::filesystem::temp_directory_path() /
         ("sdwn-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + stem);
}

std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(SDWN_SOURCE_DIR) / relative;
}

}  // namespace sdwn::testing
