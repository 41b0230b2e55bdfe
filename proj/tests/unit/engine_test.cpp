#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sdwn/runtime.hpp"

namespace sdwn {
namespace {

using testing::ap_ip;
using testing::sta_mac;
using protocol::Kind;

struct Harness {
  EventLog log;
  std::unique_ptr<Runtime> rt;

  explicit Harness(Scenario s) {
    log.set_keep_in_memory(true);
    RuntimeOptions o;
    o.log = &log;
    rt = std::make_unique<Runtime>(std::move(s), o);
    rt->start();
  }

  std::vector<json> events_of(const std::string& type) const {
    std::vector<json> out;
    for (const auto& e : log.events()) {
      if (e["event"] == type) out.push_back(e);
    }
    return out;
  }

  ReplayReport replay() const { return replay_check(log.events()); }
};

Scenario corridor_with(std::vector<ScenarioStation> stations, double sigma = 0.0) {
  auto s = testing::corridor(sigma);
  s.stations = std::move(stations);
  return s;
}

TEST(Engine, NoAgentsPublishesEmptyState) {
  AgentRegistry registry;
  DataGateway gateway;
  SelectionEngine engine(registry, gateway, nullptr, Parameters{});
  engine.initialize(0.0);
  const auto summary = engine.run_iteration(0.0);
  EXPECT_EQ(summary.handoffs, 0u);
  EXPECT_EQ(summary.agents, 0u);
  const auto matrix = gateway.get(tables::kMatrix, "current");
  EXPECT_EQ(matrix["aps"], json::array());
  EXPECT_EQ(matrix["stas"], json::array());
  EXPECT_EQ(matrix["cells"], json::array());
  EXPECT_TRUE(gateway.list(tables::kAgents).empty());
}

TEST(Engine, SingleStationReachesFixedPoint) {
  auto s = testing::corridor(0.0);
  s.aps.resize(1);
  s.stations = {testing::parked(1, {20.0, 10.0})};
  Harness h(s);
  const auto first = h.rt->step();
  EXPECT_EQ(first.joins, 1u);
  for (int i = 0; i < 5; ++i) {
    const auto next = h.rt->step();
    EXPECT_EQ(next.handoffs + next.joins, 0u);
  }
  EXPECT_EQ(h.rt->engine().assignment().at(sta_mac(1)), ap_ip(1));
  EXPECT_TRUE(h.replay().ok());
}

TEST(Engine, InitialAssociationsArePushedToAgents) {
  Harness h(corridor_with({testing::parked(1, {30.0, 10.0}, 2)}));
  EXPECT_TRUE(h.rt->agent(ap_ip(2))->hosts(sta_mac(1)));
  const auto lvap = h.rt->engine().lvap(sta_mac(1));
  ASSERT_TRUE(lvap.has_value());
  EXPECT_EQ(lvap->bssid, derive_bssid(sta_mac(1)));
  EXPECT_EQ(h.rt->gateway().get(tables::kStationsCurrent, sta_mac(1).to_string())["host"],
            "10.0.0.2");
}

TEST(Engine, NewStationJoinsBestAp) {
  Harness h(corridor_with({testing::parked(1, {45.0, 10.0})}));
  const auto summary = h.rt->step();
  EXPECT_EQ(summary.joins, 1u);
  EXPECT_EQ(h.rt->engine().assignment().at(sta_mac(1)), ap_ip(2));
  EXPECT_TRUE(h.rt->agent(ap_ip(2))->hosts(sta_mac(1)));
  const auto client = h.rt->gateway().get(tables::kClientsEver, sta_mac(1).to_string());
  EXPECT_EQ(client["connected"], true);
}

TEST(Engine, AlgorithmHandoffKeepsBssidAndUsesAddBeforeRemove) {
  Harness h(corridor_with({testing::parked(1, {45.0, 10.0}, 1)}));
  const auto summary = h.rt->step();
  EXPECT_EQ(summary.handoffs, 1u);
  EXPECT_TRUE(h.rt->agent(ap_ip(2))->hosts(sta_mac(1)));
  EXPECT_FALSE(h.rt->agent(ap_ip(1))->hosts(sta_mac(1)));
  EXPECT_EQ(h.rt->engine().lvap(sta_mac(1))->bssid, derive_bssid(sta_mac(1)));

  // lvap_add on the target precedes lvap_remove on the source.
  std::vector<std::string> order;
  for (const auto& e : h.log.events()) {
    if (e["event"] == "lvap_add" && e["ap"] == "10.0.0.2") order.push_back("add");
    if (e["event"] == "lvap_remove" && e["ap"] == "10.0.0.1") order.push_back("remove");
  }
  EXPECT_EQ(order, (std::vector<std::string>{"add", "remove"}));
  const auto handoffs = h.events_of("handoff");
  ASSERT_EQ(handoffs.size(), 1u);
  EXPECT_EQ(handoffs[0]["result"], "committed");
  EXPECT_EQ(handoffs[0]["reason"], "algorithm");
  EXPECT_TRUE(h.replay().ok());
}

TEST(Engine, HandoffToCurrentHostIsRejectedBeforeAnyMessage) {
  Harness h(corridor_with({testing::parked(1, {15.0, 10.0}, 1)}));
  int sent = 0;
  for (int ap : {1, 2}) {
    h.rt->local_link(ap_ip(ap))->set_fault_injector([&](const protocol::Message&) {
      ++sent;
      return LocalLink::Fault::kNone;
    });
  }
  const auto outcome =
      h.rt->engine().execute_handoff({sta_mac(1), ap_ip(1), ap_ip(1), HandoffReason::kManual});
  EXPECT_EQ(outcome, HandoffOutcome::kRejected);
  EXPECT_EQ(sent, 0);
}

TEST(Engine, TargetTimeoutFailsAndStationStaysOnSource) {
  Harness h(corridor_with({testing::parked(1, {15.0, 10.0}, 1)}));
  int removes = 0;
  h.rt->local_link(ap_ip(1))->set_fault_injector([&](const protocol::Message& m) {
    removes += m.kind == Kind::kRemoveLvap;
    return LocalLink::Fault::kNone;
  });
  h.rt->local_link(ap_ip(2))->set_fault_injector([](const protocol::Message& m) {
    return m.kind == Kind::kAddLvap ? LocalLink::Fault::kDropRequest : LocalLink::Fault::kNone;
  });
  const auto outcome =
      h.rt->engine().execute_handoff({sta_mac(1), ap_ip(1), ap_ip(2), HandoffReason::kManual});
  EXPECT_EQ(outcome, HandoffOutcome::kFailed);
  EXPECT_EQ(removes, 0);
  EXPECT_TRUE(h.rt->agent(ap_ip(1))->hosts(sta_mac(1)));
  EXPECT_EQ(h.rt->engine().assignment().at(sta_mac(1)), ap_ip(1));
  EXPECT_FALSE(h.rt->registry().find(ap_ip(2))->connected);
  EXPECT_TRUE(h.replay().ok());
}

TEST(Engine, TargetRefusalFailsWithoutDisconnecting) {
  Harness h(corridor_with({testing::parked(1, {15.0, 10.0}, 1), testing::parked(9, {55.0, 10.0})}));
  // Another station squatting on the same BSSID makes the target refuse.
  h.rt->agent(ap_ip(2))->add_lvap(
      {sta_mac(9), derive_bssid(sta_mac(1)), "sdwn", {ap_ip(2), testing::ap_mac(2)}});
  const auto outcome =
      h.rt->engine().execute_handoff({sta_mac(1), ap_ip(1), ap_ip(2), HandoffReason::kManual});
  EXPECT_EQ(outcome, HandoffOutcome::kFailed);
  EXPECT_TRUE(h.rt->registry().find(ap_ip(2))->connected);
  EXPECT_TRUE(h.rt->agent(ap_ip(1))->hosts(sta_mac(1)));
}

TEST(Engine, LostRemoveAckCommitsWithWarning) {
  Harness h(corridor_with({testing::parked(1, {15.0, 10.0}, 1)}));
  h.rt->local_link(ap_ip(1))->set_fault_injector([](const protocol::Message& m) {
    return m.kind == Kind::kRemoveLvap ? LocalLink::Fault::kDropResponse : LocalLink::Fault::kNone;
  });
  const auto outcome =
      h.rt->engine().execute_handoff({sta_mac(1), ap_ip(1), ap_ip(2), HandoffReason::kManual});
  EXPECT_EQ(outcome, HandoffOutcome::kCommittedWithWarning);
  EXPECT_EQ(h.rt->engine().assignment().at(sta_mac(1)), ap_ip(2));
  EXPECT_TRUE(h.rt->agent(ap_ip(2))->hosts(sta_mac(1)));
  EXPECT_FALSE(h.rt->agent(ap_ip(1))->hosts(sta_mac(1)));
  EXPECT_TRUE(h.replay().ok());
}

TEST(Engine, ManualHandoffRunsAtLoopStartAndBypassesHysteresis) {
  Harness h(corridor_with({testing::parked(1, {15.0, 10.0}, 1)}));
  h.rt->step();
  h.rt->gateway().handoff_queue().push({sta_mac(1), ap_ip(2), h.rt->now()});
  std::optional<Ipv4Address> host_at_scan;
  h.rt->engine().set_phase_observer([&](Phase p) {
    if (p == Phase::kScansCollected) host_at_scan = h.rt->engine().assignment().at(sta_mac(1));
  });
  const auto summary = h.rt->step();
  EXPECT_EQ(summary.manual_handoffs, 1u);
  EXPECT_EQ(summary.handoffs, 0u);  // pinned for the rest of the iteration
  EXPECT_EQ(host_at_scan, ap_ip(2));
  EXPECT_EQ(h.rt->engine().assignment().at(sta_mac(1)), ap_ip(2));
  EXPECT_EQ(h.rt->engine().lvap(sta_mac(1))->bssid, derive_bssid(sta_mac(1)));
  // The algorithm takes the station back on a later iteration.
  h.rt->engine().set_phase_observer({});
  std::size_t back = 0;
  for (int i = 0; i < 3; ++i) back += h.rt->step().handoffs;
  EXPECT_EQ(back, 1u);
  EXPECT_EQ(h.rt->engine().assignment().at(sta_mac(1)), ap_ip(1));
  EXPECT_TRUE(h.replay().ok());
}

TEST(Engine, ParameterChangeIsFencedToTheNextIteration) {
  Harness h(corridor_with({testing::parked(1, {20.0, 10.0}, 1)}, 2.0));
  h.rt->step();
  const double old_alpha = h.rt->engine().params().alpha;
  const double prior = h.rt->engine().matrix().find(ap_ip(1), sta_mac(1))->rssi;

  h.rt->engine().set_phase_observer([&](Phase p) {
    if (p == Phase::kScansCollected) h.rt->gateway().enqueue_param_change({"alpha", 0.1, 0.0});
  });
  const auto summary = h.rt->step();
  h.rt->engine().set_phase_observer({});
  double raw = 0.0;
  for (const auto& r : h.rt->engine().last_reports()) {
    for (const auto& o : r.observations) {
      if (r.ap.ip == ap_ip(1) && o.sta == sta_mac(1)) raw = o.raw_rssi;
    }
  }
  EXPECT_EQ(summary.alpha, old_alpha);
  EXPECT_DOUBLE_EQ(h.rt->engine().matrix().find(ap_ip(1), sta_mac(1))->rssi,
                   smooth_rssi(old_alpha, raw, prior));
  EXPECT_EQ(h.rt->engine().params().alpha, 0.1);

  const double before = h.rt->engine().matrix().find(ap_ip(1), sta_mac(1))->rssi;
  const auto next = h.rt->step();
  EXPECT_EQ(next.alpha, 0.1);
  for (const auto& r : h.rt->engine().last_reports()) {
    for (const auto& o : r.observations) {
      if (r.ap.ip == ap_ip(1) && o.sta == sta_mac(1)) raw = o.raw_rssi;
    }
  }
  EXPECT_DOUBLE_EQ(h.rt->engine().matrix().find(ap_ip(1), sta_mac(1))->rssi,
                   smooth_rssi(0.1, raw, before));
}

TEST(Engine, GatewayShowsOldParamsUntilLoopEnd) {
  Harness h(corridor_with({}));
  h.rt->gateway().enqueue_param_change({"alpha", 0.5, 0.0});
  bool old_at_publish = false;
  h.rt->engine().set_phase_observer([&](Phase p) {
    if (p == Phase::kPublished) old_at_publish = h.rt->gateway().applied_params().alpha == 0.8;
  });
  h.rt->step();
  EXPECT_TRUE(old_at_publish);
  EXPECT_EQ(h.rt->gateway().applied_params().alpha, 0.5);
  EXPECT_TRUE(h.rt->gateway().pending_param_changes().empty());
}

TEST(Engine, TimedOutAgentIsEvictedAndRecoversOnHello) {
  Harness h(corridor_with({testing::parked(1, {45.0, 10.0}, 2), testing::parked(2, {15.0, 10.0}, 1)}));
  h.rt->step();
  h.rt->local_link(ap_ip(2))->set_fault_injector([](const protocol::Message& m) {
    return m.kind == Kind::kScanRequest ? LocalLink::Fault::kDropRequest : LocalLink::Fault::kNone;
  });
  const auto summary = h.rt->step();
  EXPECT_EQ(summary.reports, 1u);
  EXPECT_FALSE(h.rt->registry().find(ap_ip(2))->connected);
  EXPECT_FALSE(h.rt->gateway().find(tables::kAgents, "10.0.0.2").has_value());
  EXPECT_TRUE(h.rt->gateway().find(tables::kAgents, "10.0.0.1").has_value());
  // The agent dropped its LVAPs when its link went away.
  EXPECT_FALSE(h.rt->agent(ap_ip(2))->hosts(sta_mac(1)));
  EXPECT_EQ(h.events_of("agent_down").size(), 1u);

  h.rt->reconnect_agent(ap_ip(2));
  h.rt->step();
  EXPECT_TRUE(h.rt->gateway().find(tables::kAgents, "10.0.0.2").has_value());
  EXPECT_EQ(h.rt->engine().assignment().at(sta_mac(1)), ap_ip(2));
  EXPECT_TRUE(h.rt->agent(ap_ip(2))->hosts(sta_mac(1)));
  EXPECT_TRUE(h.replay().ok()) << h.replay().violations.front();
}

TEST(Engine, ChannelChangeAppliesAtLoopStart) {
  Harness h(corridor_with({testing::parked(1, {15.0, 10.0}, 1)}));
  h.rt->gateway().channel_queue().push({ap_ip(1), Channel(11), 0.0});
  h.rt->step();
  EXPECT_EQ(h.rt->agent(ap_ip(1))->channel(), Channel(11));
  EXPECT_EQ(h.rt->registry().find(ap_ip(1))->channel, Channel(11));
  EXPECT_EQ(h.rt->env().transmit_channel(sta_mac(1)), Channel(11));
  EXPECT_EQ(h.rt->gateway().get(tables::kAgents, "10.0.0.1")["channel"], 11);
  // The station is still heard on the new serving channel.
  EXPECT_NE(h.rt->engine().matrix().find(ap_ip(1), sta_mac(1)), nullptr);
}

TEST(Engine, DepartedStationIsDisassociatedButRemembered) {
  auto sta = testing::parked(1, {15.0, 10.0}, 1);
  sta.leave_time = 2.5;
  Harness h(corridor_with({sta}));
  for (int i = 0; i < 8; ++i) h.rt->step();
  EXPECT_FALSE(h.rt->engine().lvap(sta_mac(1)).has_value());
  EXPECT_FALSE(h.rt->agent(ap_ip(1))->hosts(sta_mac(1)));
  EXPECT_TRUE(h.rt->gateway().list(tables::kStationsCurrent).empty());
  const auto client = h.rt->gateway().get(tables::kClientsEver, sta_mac(1).to_string());
  EXPECT_EQ(client["connected"], false);
  EXPECT_TRUE(h.replay().ok());
}

TEST(EngineProperty, StationsAreAlwaysASubsetOfClients) {
  auto s = testing::corridor(3.0, 5);
  for (int i = 1; i <= 6; ++i) {
    auto sta = testing::walking(i, {2.0 + i, 5.0}, {58.0 - i, 15.0}, 1.0 + 0.3 * i);
    sta.join_time = i * 0.7;
    if (i % 2) sta.leave_time = 20.0 + i;
    s.stations.push_back(sta);
  }
  Harness h(s);
  for (int it = 0; it < 40; ++it) {
    h.rt->step();
    std::set<std::string> clients;
    for (const auto& [k, _] : h.rt->gateway().list(tables::kClientsEver)) clients.insert(k);
    for (const auto& [k, _] : h.rt->gateway().list(tables::kStationsCurrent)) {
      EXPECT_TRUE(clients.contains(k)) << k;
    }
  }
  EXPECT_TRUE(h.replay().ok());
}

std::vector<json> stripped_run(std::uint64_t seed) {
  auto s = testing::corridor(2.0, seed);
  s.stations = {testing::walking(1, {12.0, 10.0}, {48.0, 10.0}, 1.4, 1),
                testing::parked(2, {30.0, 12.0})};
  Harness h(s);
  h.rt->run_for(20.0);
  std::vector<json> out;
  for (const auto& e : h.log.events()) out.push_back(strip_wall_fields(e));
  return out;
}

TEST(EngineProperty, FixedSeedRunsAreReproducible) {
  const auto a = stripped_run(99);
  const auto b = stripped_run(99);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, stripped_run(100));
}

}  // namespace
}  // namespace sdwn
