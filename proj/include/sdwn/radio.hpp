#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "sdwn/types.hpp"

namespace sdwn {

struct Position {
  double x = 0.0;  // meters
  double y = 0.0;

  bool operator==(const Position&) const = default;
};

double distance(const Position& a, const Position& b);

struct WorldBounds {
  double width = 100.0;
  double height = 100.0;

  bool contains(const Position& p) const;
};

struct Waypoint {
  Position position;
  double arrival_time = 0.0;  // seconds
};

/// Piecewise-linear station trajectory. Stationary before the first and
/// after the last waypoint.
class MobilityTrack {
 public:
  MobilityTrack() = default;
  explicit MobilityTrack(std::vector<Waypoint> waypoints);

  static MobilityTrack stationary(Position p) { return MobilityTrack({{p, 0.0}}); }

  Position at(double t) const;
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }

 private:
  std::vector<Waypoint> waypoints_;
};

/// Log-distance path loss with Gaussian shadowing.
struct RadioModel {
  double tx_power = 20.0;          // dBm
  double ref_loss = 40.0;          // dB at d0 = 1 m
  double path_loss_exponent = 2.4;
  double noise_sigma = 2.0;        // dB
  double rssi_floor = -95.0;       // dBm
  double rssi_ceiling = -20.0;     // dBm
  std::uint64_t seed = 1;

  static constexpr double kReferenceDistance = 1.0;

  void validate() const;
  /// Deterministic part of the received power, before noise and clamping.
  double mean_rssi(double distance_m) const;
};

struct ApSite {
  ApId id;
  Position position;
  Channel channel;
};

struct StationSite {
  MacAddress mac;
  MobilityTrack track;
  double offered_load_pps = 100.0;
  std::optional<double> join_time;   // absent before this instant
  std::optional<double> leave_time;  // absent from this instant on

  bool present(double t) const;
};

/// Deterministic virtual radio world. Answers "what does AP a hear from
/// station s on channel c at time t". A station transmits on the channel of
/// the AP currently hosting its LVAP; an unassociated station probes and is
/// audible on every channel.
///
/// Thread-safe: queries take a shared lock; clock advance, channel changes
/// and attach/detach take an exclusive one.
class RadioEnvironment {
 public:
  RadioEnvironment(WorldBounds bounds, RadioModel model, std::vector<ApSite> aps,
                   std::vector<StationSite> stations);

  /// nullopt means inaudible. Throws NotFoundError for unknown ap/sta.
  std::optional<double> rssi_at(Ipv4Address ap, MacAddress sta, Channel channel,
                                double t) const;
  Position position_at(MacAddress sta, double t) const;

  double now() const;
  void set_time(double t);
  void advance(double dt);

  void attach(MacAddress sta, Ipv4Address ap);
  /// Detaches only when `ap` is the current host.
  void detach(MacAddress sta, Ipv4Address ap);
  std::optional<Ipv4Address> host_of(MacAddress sta) const;
  std::optional<Channel> transmit_channel(MacAddress sta) const;

  void set_ap_channel(Ipv4Address ap, Channel channel);
  Channel ap_channel(Ipv4Address ap) const;

  std::vector<MacAddress> stations() const;
  bool station_present(MacAddress sta, double t) const;
  double offered_load(MacAddress sta) const;

  const RadioModel& model() const { return model_; }
  const WorldBounds& bounds() const { return bounds_; }

 private:
  const ApSite& ap_site(Ipv4Address ap) const;
  const StationSite& station_site(MacAddress sta) const;
  std::optional<Channel> transmit_channel_locked(MacAddress sta) const;
  double noise(Ipv4Address ap, MacAddress sta, double t) const;

  WorldBounds bounds_;
  RadioModel model_;
  std::map<Ipv4Address, ApSite> aps_;
  std::map<MacAddress, StationSite> stations_;

  mutable std::shared_mutex mutex_;
  double now_ = 0.0;
  std::map<Ipv4Address, Channel> ap_channels_;
  std::map<MacAddress, Ipv4Address> hosts_;
};

}  // namespace sdwn
