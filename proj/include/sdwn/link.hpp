#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "sdwn/agent.hpp"
#include "sdwn/protocol.hpp"

namespace sdwn {

class LinkError : public Error {
 public:
  using Error::Error;
};

class LinkTimeout : public LinkError {
 public:
  using LinkError::LinkError;
};

class LinkClosed : public LinkError {
 public:
  using LinkError::LinkError;
};

/// Controller-side handle on one agent connection.
class AgentLink {
 public:
  virtual ~AgentLink() = default;

  /// Assigns the next request seq, sends, and waits for the terminal
  /// response whose reply_to matches. Throws LinkTimeout / LinkClosed.
  virtual protocol::Message call(protocol::Message request,
                                 std::chrono::milliseconds timeout) = 0;
  virtual void close() = 0;
  virtual bool is_open() const = 0;
};

/// In-process transport. Every message still goes through encode/decode.
class LocalLink : public AgentLink {
 public:
  enum class Fault {
    kNone,
    kDropRequest,   // agent never sees the request
    kDropResponse,  // agent applies the request, the reply is lost
  };
  using FaultInjector = std::function<Fault(const protocol::Message&)>;

  explicit LocalLink(std::shared_ptr<Agent> agent);

  void set_fault_injector(FaultInjector injector);

  protocol::Message call(protocol::Message request,
                         std::chrono::milliseconds timeout) override;
  /// Simulates loss of the connection: the agent drops its LVAPs.
  void close() override;
  bool is_open() const override { return open_.load(); }

  const std::shared_ptr<Agent>& agent() const { return agent_; }

 private:
  std::shared_ptr<Agent> agent_;
  std::atomic<bool> open_{true};
  std::atomic<std::uint64_t> request_seq_{0};
  std::atomic<std::uint64_t> response_seq_{0};
  std::mutex fault_mutex_;
  FaultInjector injector_;
};

struct AgentInfo {
  ApId id;
  Channel channel;
  std::vector<std::string> capabilities;
  std::uint64_t generation = 0;  // bumped on every HELLO
  bool connected = false;
  double last_heartbeat = 0.0;
};

/// Controller-side table of agent sessions. A HELLO (re)registers a session;
/// a timeout or a closed link marks it disconnected until the next HELLO.
class AgentRegistry {
 public:
  using Clock = std::function<double()>;

  explicit AgentRegistry(Clock clock = [] { return 0.0; });

  std::uint64_t hello(const protocol::Hello& hello, std::shared_ptr<AgentLink> link);
  /// Closes the session's link. No-op when already disconnected.
  void mark_disconnected(Ipv4Address ip);
  /// Transport notification; ignored unless `link` is the session's current one.
  void link_closed(const AgentLink* link);

  std::vector<AgentInfo> connected() const;  // ascending ip
  std::optional<AgentInfo> find(Ipv4Address ip) const;
  std::shared_ptr<AgentLink> link(Ipv4Address ip) const;

  void set_channel(Ipv4Address ip, Channel channel);
  void touch(Ipv4Address ip);

  bool wait_for_connected(std::size_t count, std::chrono::milliseconds timeout) const;

 private:
  struct Session {
    AgentInfo info;
    std::shared_ptr<AgentLink> link;
  };

  Clock clock_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::map<Ipv4Address, Session> sessions_;
  std::uint64_t generation_ = 0;
};

}  // namespace sdwn
