#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sdwn/agent.hpp"
#include "sdwn/link.hpp"

// Stream transport for the control protocol: agents connect to the
// controller over TCP and open with HELLO.

namespace sdwn {

/// RAII file descriptor for a socket.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  /// Unblocks readers without releasing the descriptor.
  void shutdown();

  void write_all(std::span<const std::uint8_t> bytes);
  /// Returns 0 on orderly EOF.
  std::size_t read_some(std::span<std::uint8_t> buffer);

  static Socket connect_to(const std::string& host, std::uint16_t port);
  static Socket listen_on(const std::string& host, std::uint16_t port);
  std::uint16_t local_port() const;
  Socket accept();

 private:
  int fd_ = -1;
};

/// Controller-side end of one agent connection.
class StreamLink : public AgentLink {
 public:
  using HelloHandler =
      std::function<void(const protocol::Hello&, const std::shared_ptr<StreamLink>&)>;
  using CloseHandler = std::function<void(const StreamLink*)>;

  static std::shared_ptr<StreamLink> start(Socket socket, HelloHandler on_hello,
                                           CloseHandler on_close);
  ~StreamLink() override;

  protocol::Message call(protocol::Message request,
                         std::chrono::milliseconds timeout) override;
  void close() override;
  bool is_open() const override { return open_.load(); }

  /// Joins the reader thread. Must not be called from it.
  void join();

 private:
  StreamLink(Socket socket, HelloHandler on_hello, CloseHandler on_close);
  void read_loop();
  void send(const protocol::Message& message);
  void fail_pending();

  Socket socket_;
  HelloHandler on_hello_;
  CloseHandler on_close_;
  std::weak_ptr<StreamLink> self_;
  std::atomic<bool> open_{true};
  std::thread reader_;

  std::mutex write_mutex_;
  std::uint64_t next_seq_ = 0;

  std::mutex pending_mutex_;
  std::map<std::uint64_t, std::promise<protocol::Message>> pending_;
};

/// Accepts agent connections and registers them on HELLO.
class AgentServer {
 public:
  explicit AgentServer(AgentRegistry& registry);
  ~AgentServer();

  /// Binds and starts accepting. Port 0 picks an ephemeral port.
  std::uint16_t start(const std::string& host, std::uint16_t port);
  void stop();
  std::uint16_t port() const { return port_; }

 private:
  void accept_loop();

  AgentRegistry& registry_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex links_mutex_;
  std::vector<std::shared_ptr<StreamLink>> links_;
};

/// Agent-side connection: dials the controller, says HELLO, serves requests,
/// and redials after losing the link (dropping LVAPs first).
class AgentEndpoint {
 public:
  struct Options {
    std::chrono::milliseconds reconnect_delay{100};
  };

  AgentEndpoint(std::shared_ptr<Agent> agent, std::string host, std::uint16_t port,
                Options options);
  AgentEndpoint(std::shared_ptr<Agent> agent, std::string host, std::uint16_t port)
      : AgentEndpoint(std::move(agent), std::move(host), port, Options{}) {}
  ~AgentEndpoint();

  void start();
  void stop();
  /// Drops the current connection; the endpoint redials.
  void disconnect();
  bool connected() const { return connected_.load(); }
  std::uint64_t sessions() const { return sessions_.load(); }

 private:
  struct Connection;
  void run();
  void serve(const std::shared_ptr<Connection>& conn);

  std::shared_ptr<Agent> agent_;
  std::string host_;
  std::uint16_t port_;
  Options options_;
  std::atomic<bool> running_{false};
  std::atomic<bool> connected_{false};
  std::atomic<std::uint64_t> sessions_{0};
  std::thread thread_;

  std::mutex conn_mutex_;
  std::condition_variable wake_;
  std::shared_ptr<Connection> current_;
};

}  // namespace sdwn
