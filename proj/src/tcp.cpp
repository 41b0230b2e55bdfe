#include "sdwn/tcp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>

namespace sdwn {

namespace {

sockaddr_in make_address(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string h = (host.empty() || host == "localhost") ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) {
    throw ValidationError("invalid IPv4 host '" + host + "'");
  }
  return addr;
}

[[noreturn]] void throw_errno(const std::string& what) {
  throw LinkError(what + ": " + std::strerror(errno));
}

}  // namespace

// Socket --------------------------------------------------------------------

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() {
  if (fd_ >= 0) ::close(fd_);
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::write_all(std::span<const std::uint8_t> bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("send");
    }
    bytes = bytes.subspan(static_cast<std::size_t>(n));
  }
}

std::size_t Socket::read_some(std::span<std::uint8_t> buffer) {
  for (;;) {
    const ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), 0);
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno == EINTR) continue;
    throw_errno("recv");
  }
}

Socket Socket::connect_to(const std::string& host, std::uint16_t port) {
  const auto addr = make_address(host, port);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw_errno("socket");
  if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw_errno("connect");
  }
  int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return s;
}

Socket Socket::listen_on(const std::string& host, std::uint16_t port) {
  const auto addr = make_address(host, port);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw_errno("socket");
  int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw_errno("bind");
  }
  if (::listen(s.fd(), 64) != 0) throw_errno("listen");
  return s;
}

std::uint16_t Socket::local_port() const {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw_errno("getsockname");
  }
  return ntohs(addr.sin_port);
}

Socket Socket::accept() {
  for (;;) {
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return Socket(fd);
    }
    if (errno == EINTR) continue;
    throw_errno("accept");
  }
}

// StreamLink ----------------------------------------------------------------

StreamLink::StreamLink(Socket socket, HelloHandler on_hello, CloseHandler on_close)
    : socket_(std::move(socket)), on_hello_(std::move(on_hello)), on_close_(std::move(on_close)) {}

std::shared_ptr<StreamLink> StreamLink::start(Socket socket, HelloHandler on_hello,
                                              CloseHandler on_close) {
  std::shared_ptr<StreamLink> link(
      new StreamLink(std::move(socket), std::move(on_hello), std::move(on_close)));
  link->self_ = link;
  link->reader_ = std::thread([raw = link.get()] { raw->read_loop(); });
  return link;
}

StreamLink::~StreamLink() {
  close();
  if (reader_.joinable()) {
    if (reader_.get_id() == std::this_thread::get_id()) {
      reader_.detach();
    } else {
      reader_.join();
    }
  }
}

void StreamLink::join() {
  if (reader_.joinable() && reader_.get_id() != std::this_thread::get_id()) reader_.join();
}

void StreamLink::send(const protocol::Message& message) {
  std::lock_guard lock(write_mutex_);
  auto out = message;
  out.seq = ++next_seq_;
  socket_.write_all(protocol::encode(out));
}

protocol::Message StreamLink::call(protocol::Message request,
                                   std::chrono::milliseconds timeout) {
  if (!open_.load()) throw LinkClosed("link is closed");
  std::future<protocol::Message> reply;
  std::uint64_t seq = 0;
  {
    std::lock_guard lock(write_mutex_);
    seq = ++next_seq_;
    request.seq = seq;
    request.reply_to.reset();
    const auto frame = protocol::encode(request);
    {
      std::lock_guard pending_lock(pending_mutex_);
      reply = pending_[seq].get_future();
    }
    try {
      socket_.write_all(frame);
    } catch (const LinkError&) {
      std::lock_guard pending_lock(pending_mutex_);
      pending_.erase(seq);
      throw LinkClosed("link is closed");
    }
  }
  if (reply.wait_for(timeout) != std::future_status::ready) {
    std::lock_guard lock(pending_mutex_);
    pending_.erase(seq);
    throw LinkTimeout("request " + std::to_string(seq) + " timed out");
  }
  return reply.get();
}

void StreamLink::close() {
  if (open_.exchange(false)) socket_.shutdown();
}

void StreamLink::fail_pending() {
  std::lock_guard lock(pending_mutex_);
  for (auto& [_, promise] : pending_) {
    promise.set_exception(std::make_exception_ptr(LinkClosed("link closed")));
  }
  pending_.clear();
}

void StreamLink::read_loop() {
  protocol::FrameReader reader;
  std::array<std::uint8_t, 16384> buffer{};
  bool greeted = false;
  try {
    for (;;) {
      const auto n = socket_.read_some(buffer);
      if (n == 0) break;
      reader.append(std::span(buffer).first(n));
      while (auto message = reader.next()) {
        if (!greeted) {
          if (message->kind != protocol::Kind::kHello) {
            throw protocol::ProtocolError("first frame must be HELLO");
          }
          if (auto self = self_.lock()) {
            on_hello_(std::get<protocol::Hello>(message->payload), self);
          }
          send(protocol::make_response(*message, protocol::Kind::kAck));
          greeted = true;
        } else if (message->kind == protocol::Kind::kPing) {
          send(protocol::make_response(*message, protocol::Kind::kPong));
        } else if (message->reply_to) {
          std::lock_guard lock(pending_mutex_);
          auto it = pending_.find(*message->reply_to);
          if (it != pending_.end()) {
            it->second.set_value(std::move(*message));
            pending_.erase(it);
          }
        }
      }
    }
  } catch (const std::exception&) {
    // protocol error or socket failure: reset the connection
  }
  open_.store(false);
  socket_.shutdown();
  fail_pending();
  if (on_close_) on_close_(this);
}

// AgentServer ---------------------------------------------------------------

AgentServer::AgentServer(AgentRegistry& registry) : registry_(registry) {}

AgentServer::~AgentServer() { stop(); }

std::uint16_t AgentServer::start(const std::string& host, std::uint16_t port) {
  listener_ = Socket::listen_on(host, port);
  port_ = listener_.local_port();
  running_.store(true);
  acceptor_ = std::thread([this] { accept_loop(); });
  return port_;
}

void AgentServer::accept_loop() {
  while (running_.load()) {
    Socket conn;
    try {
      conn = listener_.accept();
    } catch (const LinkError&) {
      if (!running_.load()) break;
      continue;
    }
    if (!running_.load()) break;
    auto link = StreamLink::start(
        std::move(conn),
        [this](const protocol::Hello& hello, const std::shared_ptr<StreamLink>& l) {
          registry_.hello(hello, l);
        },
        [this](const StreamLink* l) { registry_.link_closed(l); });
    std::lock_guard lock(links_mutex_);
    links_.push_back(std::move(link));
  }
}

void AgentServer::stop() {
  if (!running_.exchange(false)) return;
  listener_.shutdown();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::shared_ptr<StreamLink>> links;
  {
    std::lock_guard lock(links_mutex_);
    links.swap(links_);
  }
  for (auto& link : links) {
    link->close();
    link->join();
  }
}

// AgentEndpoint -------------------------------------------------------------

struct AgentEndpoint::Connection {
  Socket socket;
  std::mutex write_mutex;
  std::uint64_t next_seq = 0;
  std::mutex workers_mutex;
  std::vector<std::thread> workers;

  void send(protocol::Message message) {
    std::lock_guard lock(write_mutex);
    message.seq = ++next_seq;
    try {
      socket.write_all(protocol::encode(message));
    } catch (const LinkError&) {
      // connection gone; the read side notices
    }
  }

  void join_workers() {
    std::vector<std::thread> done;
    {
      std::lock_guard lock(workers_mutex);
      done.swap(workers);
    }
    for (auto& t : done) t.join();
  }
};

AgentEndpoint::AgentEndpoint(std::shared_ptr<Agent> agent, std::string host, std::uint16_t port,
                             Options options)
    : agent_(std::move(agent)), host_(std::move(host)), port_(port), options_(options) {}

AgentEndpoint::~AgentEndpoint() { stop(); }

void AgentEndpoint::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] { run(); });
}

void AgentEndpoint::stop() {
  if (!running_.exchange(false)) return;
  disconnect();
  wake_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void AgentEndpoint::disconnect() {
  std::lock_guard lock(conn_mutex_);
  if (current_) current_->socket.shutdown();
}

void AgentEndpoint::run() {
  while (running_.load()) {
    auto conn = std::make_shared<Connection>();
    try {
      conn->socket = Socket::connect_to(host_, port_);
    } catch (const LinkError&) {
      std::unique_lock lock(conn_mutex_);
      wake_.wait_for(lock, options_.reconnect_delay, [this] { return !running_.load(); });
      continue;
    }
    {
      std::lock_guard lock(conn_mutex_);
      current_ = conn;
    }
    if (running_.load()) serve(conn);
    connected_.store(false);
    agent_->drop_all_lvaps();
    conn->join_workers();
    {
      std::lock_guard lock(conn_mutex_);
      current_.reset();
    }
    std::unique_lock lock(conn_mutex_);
    wake_.wait_for(lock, options_.reconnect_delay, [this] { return !running_.load(); });
  }
}

void AgentEndpoint::serve(const std::shared_ptr<Connection>& conn) {
  conn->send(protocol::make_request(protocol::Kind::kHello, agent_->hello()));
  const std::uint64_t hello_seq = 1;

  protocol::FrameReader reader;
  std::array<std::uint8_t, 16384> buffer{};
  try {
    for (;;) {
      const auto n = conn->socket.read_some(buffer);
      if (n == 0) return;
      reader.append(std::span(buffer).first(n));
      while (auto message = reader.next()) {
        if (message->reply_to) {
          if (*message->reply_to == hello_seq && message->kind == protocol::Kind::kAck) {
            connected_.store(true);
            ++sessions_;
          }
          continue;
        }
        if (message->kind == protocol::Kind::kScanRequest) {
          // Scans run beside the command stream so an overlapping request
          // can be answered BUSY right away.
          std::lock_guard lock(conn->workers_mutex);
          conn->workers.emplace_back([this, conn, request = *message] {
            conn->send(agent_->handle(request));
          });
        } else {
          conn->send(agent_->handle(*message));
        }
      }
    }
  } catch (const std::exception&) {
    conn->socket.shutdown();
  }
}

}  // namespace sdwn
