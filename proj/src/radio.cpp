#include "sdwn/radio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

namespace sdwn {

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool WorldBounds::contains(const Position& p) const {
  return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.y >= 0.0 &&
         p.x <= width && p.y <= height;
}

// MobilityTrack -------------------------------------------------------------

MobilityTrack::MobilityTrack(std::vector<Waypoint> waypoints)
    : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) throw ValidationError("mobility track needs at least one waypoint");
  for (std::size_t i = 0; i < waypoints_.size(); ++i) {
    const auto& w = waypoints_[i];
    if (!std::isfinite(w.position.x) || !std::isfinite(w.position.y) ||
        !std::isfinite(w.arrival_time)) {
      throw ValidationError("mobility track waypoint " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(w.arrival_time > waypoints_[i - 1].arrival_time)) {
      throw ValidationError("mobility track arrival times must be strictly increasing (waypoint " +
                            std::to_string(i) + ")");
    }
  }
}

Position MobilityTrack::at(double t) const {
  if (waypoints_.empty()) throw ValidationError("empty mobility track");
  if (t <= waypoints_.front().arrival_time) return waypoints_.front().position;
  if (t >= waypoints_.back().arrival_time) return waypoints_.back().position;
  auto next = std::upper_bound(waypoints_.begin(), waypoints_.end(), t,
                               [](double v, const Waypoint& w) { return v < w.arrival_time; });
  const auto& b = *next;
  const auto& a = *(next - 1);
  const double f = (t - a.arrival_time) / (b.arrival_time - a.arrival_time);
  return {a.position.x + f * (b.position.x - a.position.x),
          a.position.y + f * (b.position.y - a.position.y)};
}

// RadioModel ----------------------------------------------------------------

void RadioModel::validate() const {
  const double values[] = {tx_power, ref_loss, path_loss_exponent, noise_sigma, rssi_floor,
                           rssi_ceiling};
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("radio model values must be finite");
  }
  if (!(path_loss_exponent > 0.0)) throw ValidationError("radio.path_loss_exponent must be > 0");
  if (noise_sigma < 0.0) throw ValidationError("radio.noise_sigma must be >= 0");
  if (!(rssi_floor < rssi_ceiling)) {
    throw ValidationError("radio.rssi_floor must be below radio.rssi_ceiling");
  }
}

double RadioModel::mean_rssi(double distance_m) const {
  const double d = std::max(distance_m, kReferenceDistance);
  return tx_power - ref_loss -
         10.0 * path_loss_exponent * std::log10(d / kReferenceDistance);
}

bool StationSite::present(double t) const {
  if (join_time && t < *join_time) return false;
  if (leave_time && t >= *leave_time) return false;
  return true;
}

// RadioEnvironment ----------------------------------------------------------

RadioEnvironment::RadioEnvironment(WorldBounds bounds, RadioModel model,
                                   std::vector<ApSite> aps,
                                   std::vector<StationSite> stations)
    : bounds_(bounds), model_(model) {
  model_.validate();
  for (auto& ap : aps) {
    if (!bounds_.contains(ap.position)) {
      throw ValidationError("AP " + ap.id.ip.to_string() + " lies outside the world bounds");
    }
    ap_channels_[ap.id.ip] = ap.channel;
    if (!aps_.emplace(ap.id.ip, std::move(ap)).second) {
      throw ValidationError("duplicate AP ip");
    }
  }
  for (auto& sta : stations) {
    for (const auto& w : sta.track.waypoints()) {
      if (!bounds_.contains(w.position)) {
        throw ValidationError("station " + sta.mac.to_string() +
                              " has a waypoint outside the world bounds");
      }
    }
    if (!stations_.emplace(sta.mac, std::move(sta)).second) {
      throw ValidationError("duplicate station mac");
    }
  }
}

const ApSite& RadioEnvironment::ap_site(Ipv4Address ap) const {
  auto it = aps_.find(ap);
  if (it == aps_.end()) throw NotFoundError("unknown AP " + ap.to_string());
  return it->second;
}

const StationSite& RadioEnvironment::station_site(MacAddress sta) const {
  auto it = stations_.find(sta);
  if (it == stations_.end()) throw NotFoundError("unknown station " + sta.to_string());
  return it->second;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

// Shadowing sample for (ap, sta, t). Each key seeds its own engine so the
// value does not depend on query order. Box-Muller over mt19937_64 keeps the
// sequence identical across standard library implementations.
double RadioEnvironment::noise(Ipv4Address ap, MacAddress sta, double t) const {
  if (model_.noise_sigma == 0.0) return 0.0;
  std::uint64_t key = splitmix64(model_.seed);
  key = splitmix64(key ^ ap.value());
  key = splitmix64(key ^ sta.value());
  key = splitmix64(key ^ std::bit_cast<std::uint64_t>(t));
  std::mt19937_64 engine(key);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = (static_cast<double>(engine() >> 11) + 0.5) * kScale;
  const double u2 = static_cast<double>(engine() >> 11) * kScale;
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return model_.noise_sigma * z;
}

std::optional<Channel> RadioEnvironment::transmit_channel_locked(MacAddress sta) const {
  auto host = hosts_.find(sta);
  if (host == hosts_.end()) return std::nullopt;
  return ap_channels_.at(host->second);
}

std::optional<double> RadioEnvironment::rssi_at(Ipv4Address ap, MacAddress sta,
                                                Channel channel, double t) const {
  const auto& ap_info = ap_site(ap);
  const auto& sta_info = station_site(sta);
  {
    std::shared_lock lock(mutex_);
    const auto tx = transmit_channel_locked(sta);
    if (tx && *tx != channel) return std::nullopt;
  }
  if (!sta_info.present(t)) return std::nullopt;
  const double d = distance(ap_info.position, sta_info.track.at(t));
  const double rssi = model_.mean_rssi(d) + noise(ap, sta, t);
  return std::clamp(rssi, model_.rssi_floor, model_.rssi_ceiling);
}

Position RadioEnvironment::position_at(MacAddress sta, double t) const {
  return station_site(sta).track.at(t);
}

double RadioEnvironment::now() const {
  std::shared_lock lock(mutex_);
  return now_;
}

void RadioEnvironment::set_time(double t) {
  std::unique_lock lock(mutex_);
  now_ = t;
}

void RadioEnvironment::advance(double dt) {
  std::unique_lock lock(mutex_);
  now_ += dt;
}

void RadioEnvironment::attach(MacAddress sta, Ipv4Address ap) {
  station_site(sta);
  ap_site(ap);
  std::unique_lock lock(mutex_);
  hosts_[sta] = ap;
}

void RadioEnvironment::detach(MacAddress sta, Ipv4Address ap) {
  std::unique_lock lock(mutex_);
  auto it = hosts_.find(sta);
  if (it != hosts_.end() && it->second == ap) hosts_.erase(it);
}

std::optional<Ipv4Address> RadioEnvironment::host_of(MacAddress sta) const {
  std::shared_lock lock(mutex_);
  auto it = hosts_.find(sta);
  if (it == hosts_.end()) return std::nullopt;
  return it->second;
}

std::optional<Channel> RadioEnvironment::transmit_channel(MacAddress sta) const {
  station_site(sta);
  std::shared_lock lock(mutex_);
  return transmit_channel_locked(sta);
}

void RadioEnvironment::set_ap_channel(Ipv4Address ap, Channel channel) {
  ap_site(ap);
  std::unique_lock lock(mutex_);
  ap_channels_[ap] = channel;
}

Channel RadioEnvironment::ap_channel(Ipv4Address ap) const {
  ap_site(ap);
  std::shared_lock lock(mutex_);
  return ap_channels_.at(ap);
}

std::vector<MacAddress> RadioEnvironment::stations() const {
  std::vector<MacAddress> out;
  out.reserve(stations_.size());
  for (const auto& [mac, _] : stations_) out.push_back(mac);
  return out;
}

bool RadioEnvironment::station_present(MacAddress sta, double t) const {
  return station_site(sta).present(t);
}

double RadioEnvironment::offered_load(MacAddress sta) const {
  return station_site(sta).offered_load_pps;
}

}  // namespace sdwn
