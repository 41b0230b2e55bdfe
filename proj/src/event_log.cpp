#include "sdwn/event_log.hpp"

#include <map>
#include <set>
#include <sstream>

namespace sdwn {

EventLog::EventLog(const std::filesystem::path& path) : file_(path, std::ios::trunc) {
  if (!file_) throw NotFoundError("cannot open log file '" + path.string() + "'");
}

void EventLog::set_keep_in_memory(bool keep) {
  std::lock_guard lock(mutex_);
  keep_ = keep;
}

void EventLog::emit(json event) {
  std::lock_guard lock(mutex_);
  if (file_.is_open()) file_ << event.dump() << '\n';
  if (keep_) events_.push_back(std::move(event));
}

void EventLog::flush() {
  std::lock_guard lock(mutex_);
  if (file_.is_open()) file_.flush();
}

std::vector<json> EventLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

json strip_wall_fields(const json& event) {
  if (event.is_object()) {
    json out = json::object();
    for (const auto& [key, value] : event.items()) {
      if (key.rfind("wall_", 0) == 0) continue;
      out[key] = strip_wall_fields(value);
    }
    return out;
  }
  if (event.is_array()) {
    json out = json::array();
    for (const auto& v : event) out.push_back(strip_wall_fields(v));
    return out;
  }
  return event;
}

std::vector<std::string> ReplayReport::violated() const {
  std::set<std::string> names;
  for (const auto& v : violations) names.insert(v.substr(0, v.find(':')));
  return {names.begin(), names.end()};
}

namespace {

class Replayer {
 public:
  void feed(const json& e, std::size_t line) {
    ++report_.events;
    if (!e.is_object() || !e.contains("event") || !e["event"].is_string()) {
      violation("malformed", line, "event without type");
      return;
    }
    const auto type = e["event"].get<std::string>();
    check_order(e, type, line);
    check_bssid(e, line);

    if (type == "lvap_add") {
      if (e.value("ok", false)) {
        auto& h = hosts_[e.at("sta").get<std::string>()];
        h.insert(e.at("ap").get<std::string>());
        if (h.size() > 2) {
          violation("single-host", line,
                    e.at("sta").get<std::string>() + " hosted by " + std::to_string(h.size()) +
                        " agents");
        }
      }
    } else if (type == "lvap_remove") {
      if (e.value("ok", false)) {
        hosts_[e.at("sta").get<std::string>()].erase(e.at("ap").get<std::string>());
      }
    } else if (type == "agent_down") {
      const auto ap = e.at("ap").get<std::string>();
      for (auto& [_, h] : hosts_) h.erase(ap);
    } else if (type == "handoff") {
      ++report_.handoffs;
      const auto sta = e.at("sta").get<std::string>();
      const auto result = e.at("result").get<std::string>();
      const auto& h = hosts_[sta];
      if (result == "committed" || result == "committed_with_warning") {
        const auto target = e.at("target").get<std::string>();
        if (h.size() != 1 || !h.contains(target)) {
          violation("single-host", line,
                    sta + " not hosted by exactly its target after committed handoff (" +
                        std::to_string(h.size()) + " hosts)");
        }
      } else if (result == "failed") {
        if (h.size() > 1 || h.contains(e.at("target").get<std::string>())) {
          violation("single-host", line, sta + " left on the target after a failed handoff");
        }
      }
    } else if (type == "disassociate") {
      const auto sta = e.at("sta").get<std::string>();
      if (!hosts_[sta].empty()) {
        violation("single-host", line, sta + " still hosted after disassociation");
      }
    } else if (type == "iteration") {
      ++report_.iterations;
      for (const auto& [sta, h] : hosts_) {
        if (h.size() > 1) {
          violation("single-host", line,
                    sta + " hosted by " + std::to_string(h.size()) + " agents at iteration end");
        }
      }
      if (e.contains("wall_ms") && e.contains("scan_interval")) {
        const double wall_ms = e["wall_ms"].get<double>();
        const double budget_ms = e["scan_interval"].get<double>() * 1000.0;
        if (!(wall_ms < budget_ms)) {
          violation("loop-budget", line,
                    "iteration took " + std::to_string(wall_ms) + " ms (budget " +
                        std::to_string(budget_ms) + " ms)");
        }
      }
    }
  }

  ReplayReport finish() {
    if (report_.events == 0) report_.warnings.push_back("empty log: nothing to check");
    return std::move(report_);
  }

  void violation(const std::string& name, std::size_t line, const std::string& detail) {
    report_.violations.push_back(name + ": line " + std::to_string(line) + ": " + detail);
  }

 private:
  void check_order(const json& e, const std::string& type, std::size_t line) {
    if (!e.contains("iteration") || !e["iteration"].is_number_integer()) {
      violation("malformed", line, "event without iteration counter");
      return;
    }
    const auto it = e["iteration"].get<std::int64_t>();
    if (it < last_iteration_) {
      violation("iteration-order", line, "iteration counter went backwards");
    }
    if (type == "iteration" && it <= last_completed_) {
      violation("iteration-order", line, "iteration counter repeated");
    }
    last_iteration_ = std::max(last_iteration_, it);
    if (type == "iteration") last_completed_ = it;
  }

  void check_bssid(const json& e, std::size_t line) {
    if (!e.contains("sta") || !e.contains("bssid")) return;
    const auto sta = e["sta"].get<std::string>();
    const auto bssid = e["bssid"].get<std::string>();
    auto [it, inserted] = bssids_.emplace(sta, bssid);
    if (!inserted && it->second != bssid) {
      violation("bssid-stability", line,
                sta + " changed bssid from " + it->second + " to " + bssid);
    }
  }

  ReplayReport report_;
  std::map<std::string, std::set<std::string>> hosts_;
  std::map<std::string, std::string> bssids_;
  std::int64_t last_iteration_ = 0;
  std::int64_t last_completed_ = -1;
};

}  // namespace

ReplayReport replay_check(const std::vector<json>& events) {
  Replayer r;
  std::size_t line = 0;
  for (const auto& e : events) {
    ++line;
    try {
      r.feed(e, line);
    } catch (const json::exception& ex) {
      r.violation("malformed", line, ex.what());
    }
  }
  return r.finish();
}

ReplayReport replay_check(std::istream& in) {
  Replayer r;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      r.feed(json::parse(text), line);
    } catch (const json::exception& ex) {
      r.violation("malformed", line, ex.what());
    }
  }
  return r.finish();
}

ReplayReport replay_check_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open log '" + path.string() + "'");
  return replay_check(in);
}

}  // namespace sdwn
