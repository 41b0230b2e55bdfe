#include "sdwn/link.hpp"

namespace sdwn {

namespace {

protocol::Message through_codec(const protocol::Message& m) {
  const auto bytes = protocol::encode(m);
  auto decoded = protocol::decode(bytes);
  if (decoded.status != protocol::DecodeStatus::kOk) {
    throw protocol::ProtocolError("local link codec failure: " + decoded.error);
  }
  return std::move(*decoded.message);
}

}  // namespace

// LocalLink -----------------------------------------------------------------

LocalLink::LocalLink(std::shared_ptr<Agent> agent) : agent_(std::move(agent)) {}

void LocalLink::set_fault_injector(FaultInjector injector) {
  std::lock_guard lock(fault_mutex_);
  injector_ = std::move(injector);
}

protocol::Message LocalLink::call(protocol::Message request,
                                  std::chrono::milliseconds /*timeout*/) {
  if (!open_.load()) throw LinkClosed("link to " + agent_->id().ip.to_string() + " is closed");
  request.seq = ++request_seq_;
  request.reply_to.reset();
  const auto on_wire = through_codec(request);

  Fault fault = Fault::kNone;
  {
    std::lock_guard lock(fault_mutex_);
    if (injector_) fault = injector_(on_wire);
  }
  if (fault == Fault::kDropRequest) {
    throw LinkTimeout("request to " + agent_->id().ip.to_string() + " timed out");
  }
  auto response = agent_->handle(on_wire);
  response.seq = ++response_seq_;
  auto received = through_codec(response);
  if (fault == Fault::kDropResponse) {
    throw LinkTimeout("response from " + agent_->id().ip.to_string() + " timed out");
  }
  return received;
}

void LocalLink::close() {
  if (open_.exchange(false)) agent_->drop_all_lvaps();
}

// AgentRegistry -------------------------------------------------------------

AgentRegistry::AgentRegistry(Clock clock) : clock_(std::move(clock)) {}

std::uint64_t AgentRegistry::hello(const protocol::Hello& hello,
                                   std::shared_ptr<AgentLink> link) {
  std::shared_ptr<AgentLink> previous;
  const AgentLink* current = link.get();
  std::uint64_t generation = 0;
  {
    std::lock_guard lock(mutex_);
    auto& session = sessions_[hello.ap.ip];
    previous = std::exchange(session.link, std::move(link));
    session.info.id = hello.ap;
    session.info.channel = hello.channel;
    session.info.capabilities = hello.capabilities;
    session.info.generation = generation = ++generation_;
    session.info.connected = true;
    session.info.last_heartbeat = clock_();
  }
  if (previous && previous.get() != current) previous->close();
  changed_.notify_all();
  return generation;
}

void AgentRegistry::mark_disconnected(Ipv4Address ip) {
  std::shared_ptr<AgentLink> link;
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(ip);
    if (it == sessions_.end() || !it->second.info.connected) return;
    it->second.info.connected = false;
    link = std::move(it->second.link);
  }
  if (link) link->close();
  changed_.notify_all();
}

void AgentRegistry::link_closed(const AgentLink* link) {
  {
    std::lock_guard lock(mutex_);
    for (auto& [_, session] : sessions_) {
      if (session.link.get() == link && session.info.connected) {
        session.info.connected = false;
        session.link.reset();
      }
    }
  }
  changed_.notify_all();
}

std::vector<AgentInfo> AgentRegistry::connected() const {
  std::lock_guard lock(mutex_);
  std::vector<AgentInfo> out;
  for (const auto& [_, session] : sessions_) {
    if (session.info.connected) out.push_back(session.info);
  }
  return out;
}

std::optional<AgentInfo> AgentRegistry::find(Ipv4Address ip) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(ip);
  if (it == sessions_.end()) return std::nullopt;
  return it->second.info;
}

std::shared_ptr<AgentLink> AgentRegistry::link(Ipv4Address ip) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(ip);
  if (it == sessions_.end() || !it->second.info.connected) return nullptr;
  return it->second.link;
}

void AgentRegistry::set_channel(Ipv4Address ip, Channel channel) {
  std::lock_guard lock(mutex_);
  if (auto it = sessions_.find(ip); it != sessions_.end()) it->second.info.channel = channel;
}

void AgentRegistry::touch(Ipv4Address ip) {
  std::lock_guard lock(mutex_);
  if (auto it = sessions_.find(ip); it != sessions_.end()) {
    it->second.info.last_heartbeat = clock_();
  }
}

bool AgentRegistry::wait_for_connected(std::size_t count,
                                       std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return changed_.wait_for(lock, timeout, [&] {
    std::size_t n = 0;
    for (const auto& [_, session] : sessions_) n += session.info.connected ? 1 : 0;
    return n >= count;
  });
}

}  // namespace sdwn
