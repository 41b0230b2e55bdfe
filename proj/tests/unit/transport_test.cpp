#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "fixtures.hpp"
#include "sdwn/runtime.hpp"
#include "sdwn/tcp.hpp"

namespace sdwn {
namespace {

using namespace std::chrono_literals;
using protocol::Kind;
using testing::ap_ip;
using testing::sta_mac;

bool eventually(const std::function<bool()>& pred, std::chrono::milliseconds limit = 3000ms) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(5ms);
  }
  return pred();
}

struct TcpFixture : ::testing::Test {
  std::shared_ptr<RadioEnvironment> env;
  AgentRegistry registry;
  std::unique_ptr<AgentServer> server;
  std::uint16_t port = 0;

  void SetUp() override {
    std::vector<ApSite> aps = {{{ap_ip(1), testing::ap_mac(1)}, {5.0, 5.0}, Channel(1)}};
    std::vector<StationSite> stas = {{sta_mac(1), MobilityTrack::stationary({8.0, 5.0})}};
    env = std::make_shared<RadioEnvironment>(WorldBounds{20.0, 20.0}, RadioModel{}, aps, stas);
    server = std::make_unique<AgentServer>(registry);
    port = server->start("127.0.0.1", 0);
  }

  void TearDown() override { server->stop(); }

  std::shared_ptr<Agent> make_agent(bool realtime = false) {
    AgentOptions o;
    o.realtime_scans = realtime;
    return std::make_shared<Agent>(ApId{ap_ip(1), testing::ap_mac(1)}, Channel(1), env, o);
  }

  Lvap lvap() const {
    return {sta_mac(1), derive_bssid(sta_mac(1)), "sdwn", {ap_ip(1), testing::ap_mac(1)}};
  }
};

TEST_F(TcpFixture, HelloRegistersAndRequestsRoundTrip) {
  auto agent = make_agent();
  AgentEndpoint endpoint(agent, "127.0.0.1", port);
  endpoint.start();
  ASSERT_TRUE(registry.wait_for_connected(1, 3000ms));
  EXPECT_TRUE(eventually([&] { return endpoint.connected(); }));
  auto info = registry.find(ap_ip(1));
  ASSERT_TRUE(info.has_value());
  EXPECT_EQ(info->id.mac, testing::ap_mac(1));
  EXPECT_EQ(info->capabilities, AgentOptions{}.capabilities);

  auto link = registry.link(ap_ip(1));
  const auto pong = link->call(protocol::make_request(Kind::kPing), 500ms);
  EXPECT_EQ(pong.kind, Kind::kPong);
  const auto ack = link->call(protocol::make_request(Kind::kAddLvap, protocol::AddLvap{lvap()}), 500ms);
  EXPECT_EQ(ack.kind, Kind::kAck);
  EXPECT_TRUE(agent->hosts(sta_mac(1)));
  const auto scan = link->call(
      protocol::make_request(Kind::kScanRequest, protocol::ScanRequest{Channel(1), 0.06}), 500ms);
  ASSERT_EQ(scan.kind, Kind::kScanReport);
  EXPECT_EQ(std::get<protocol::ScanReportBody>(scan.payload).report.observations.size(), 1u);
  endpoint.stop();
}

TEST_F(TcpFixture, ResponsesPairByReplyToUnderInterleaving) {
  auto agent = make_agent(true);
  AgentEndpoint endpoint(agent, "127.0.0.1", port);
  endpoint.start();
  ASSERT_TRUE(registry.wait_for_connected(1, 3000ms));
  auto link = registry.link(ap_ip(1));

  auto slow = std::async(std::launch::async, [&] {
    return link->call(
        protocol::make_request(Kind::kScanRequest, protocol::ScanRequest{Channel(1), 0.3}), 2000ms);
  });
  ASSERT_TRUE(eventually([&] { return agent->scanning(); }));
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::future<protocol::Message>> quick;
  for (int i = 0; i < 8; ++i) {
    quick.push_back(std::async(std::launch::async, [&] {
      return link->call(protocol::make_request(Kind::kPing), 1000ms);
    }));
  }
  for (auto& q : quick) EXPECT_EQ(q.get().kind, Kind::kPong);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 250ms);
  // A second scan while busy gets the cached report flagged through BUSY.
  const auto busy = link->call(
      protocol::make_request(Kind::kScanRequest, protocol::ScanRequest{Channel(1), 0.01}), 1000ms);
  EXPECT_EQ(busy.kind, Kind::kBusy);
  EXPECT_EQ(slow.get().kind, Kind::kScanReport);
  endpoint.stop();
}

TEST_F(TcpFixture, CallTimesOut) {
  auto agent = make_agent(true);
  AgentEndpoint endpoint(agent, "127.0.0.1", port);
  endpoint.start();
  ASSERT_TRUE(registry.wait_for_connected(1, 3000ms));
  auto link = registry.link(ap_ip(1));
  EXPECT_THROW(link->call(protocol::make_request(Kind::kScanRequest,
                                                 protocol::ScanRequest{Channel(1), 0.5}),
                          50ms),
               LinkTimeout);
  endpoint.stop();
}

TEST_F(TcpFixture, LostConnectionDropsLvapsAndRedials) {
  auto agent = make_agent();
  AgentEndpoint endpoint(agent, "127.0.0.1", port, {20ms});
  endpoint.start();
  ASSERT_TRUE(registry.wait_for_connected(1, 3000ms));
  const auto first = registry.find(ap_ip(1))->generation;
  registry.link(ap_ip(1))->call(protocol::make_request(Kind::kAddLvap, protocol::AddLvap{lvap()}),
                                500ms);
  ASSERT_TRUE(agent->hosts(sta_mac(1)));

  endpoint.disconnect();
  ASSERT_TRUE(eventually([&] { return endpoint.sessions() >= 2 && endpoint.connected(); }));
  EXPECT_FALSE(agent->hosts(sta_mac(1)));
  ASSERT_TRUE(eventually([&] {
    auto info = registry.find(ap_ip(1));
    return info && info->connected && info->generation > first;
  }));
  EXPECT_EQ(registry.link(ap_ip(1))->call(protocol::make_request(Kind::kPing), 500ms).kind,
            Kind::kPong);
  endpoint.stop();
  EXPECT_TRUE(eventually([&] { return !registry.find(ap_ip(1))->connected; }));
}

TEST_F(TcpFixture, ControllerSideCloseMakesAgentDropLvaps) {
  auto agent = make_agent();
  AgentEndpoint endpoint(agent, "127.0.0.1", port, {20ms});
  endpoint.start();
  ASSERT_TRUE(registry.wait_for_connected(1, 3000ms));
  registry.link(ap_ip(1))->call(protocol::make_request(Kind::kAddLvap, protocol::AddLvap{lvap()}),
                                500ms);
  registry.mark_disconnected(ap_ip(1));
  EXPECT_TRUE(eventually([&] { return !agent->hosts(sta_mac(1)); }));
  EXPECT_TRUE(eventually([&] { return registry.find(ap_ip(1))->connected; }));
  endpoint.stop();
}

TEST_F(TcpFixture, GarbageAndMissingHelloAreRejected) {
  {
    auto s = Socket::connect_to("127.0.0.1", port);
    const std::vector<std::uint8_t> junk = {0, 0, 0, 3, 'x', 'y', 'z'};
    s.write_all(junk);
    std::array<std::uint8_t, 64> buf{};
    EXPECT_EQ(s.read_some(buf), 0u);
  }
  {
    auto s = Socket::connect_to("127.0.0.1", port);
    auto ping = protocol::make_request(Kind::kPing);
    ping.seq = 1;
    s.write_all(protocol::encode(ping));
    std::array<std::uint8_t, 64> buf{};
    EXPECT_EQ(s.read_some(buf), 0u);
  }
  EXPECT_TRUE(registry.connected().empty());
}

TEST(TcpRuntime, LoopRunsOverSockets) {
  auto s = testing::corridor(0.0);
  s.stations = {testing::walking(1, {12.0, 10.0}, {48.0, 10.0}, 6.0, 1)};
  EventLog log;
  log.set_keep_in_memory(true);
  RuntimeOptions o;
  o.transport = Transport::kTcp;
  o.log = &log;
  Runtime rt(s, o);
  rt.start();
  std::size_t handoffs = 0;
  for (const auto& summary : rt.run_for(12.0)) {
    EXPECT_EQ(summary.agents, 2u);
    EXPECT_EQ(summary.reports, 2u);
    handoffs += summary.handoffs;
  }
  EXPECT_EQ(handoffs, 1u);
  EXPECT_TRUE(rt.agent(ap_ip(2))->hosts(sta_mac(1)));
  rt.shutdown();
  EXPECT_TRUE(replay_check(log.events()).ok());
}

}  // namespace
}  // namespace sdwn
