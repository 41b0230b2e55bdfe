#pragma once

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "sdwn/params.hpp"
#include "sdwn/selection.hpp"
#include "sdwn/types.hpp"

namespace sdwn {

using Record = json;

enum class FieldType { kString, kNumber, kInteger, kBoolean, kArray, kObject };

struct FieldSpec {
  std::string name;
  FieldType type;
  bool nullable = false;
};

/// Required top-level fields of a record. Extra fields are allowed.
struct TableSchema {
  std::vector<FieldSpec> fields;

  /// Throws ValidationError naming the first offending field.
  void validate(const Record& record) const;
};

/// Unbounded FIFO used for mutations that are applied at loop boundaries.
template <typename T>
class CommandQueue {
 public:
  void push(T item) {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(item));
  }

  /// Atomically empties the queue, returning items in push order.
  std::vector<T> drain() {
    std::lock_guard lock(mutex_);
    std::vector<T> out(std::make_move_iterator(items_.begin()),
                       std::make_move_iterator(items_.end()));
    items_.clear();
    return out;
  }

  std::vector<T> snapshot() const {
    std::lock_guard lock(mutex_);
    return {items_.begin(), items_.end()};
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::deque<T> items_;
};

struct ManualHandoffRequest {
  MacAddress sta;
  Ipv4Address target;
  double requested_at = 0.0;
};

struct ChannelChangeRequest {
  Ipv4Address ap;
  Channel channel;
  double requested_at = 0.0;
};

namespace tables {
inline constexpr const char* kClientsEver = "clients_ever";
inline constexpr const char* kStationsCurrent = "stations_current";
inline constexpr const char* kAgents = "agents";
inline constexpr const char* kMatrix = "matrix";
inline constexpr const char* kStats = "stats";
inline constexpr const char* kParams = "params";
inline constexpr const char* kLastScans = "last_scans";
}  // namespace tables

/// In-memory table store shared by the selection loop (single writer) and
/// the management API (many readers, many enqueuers). Rows are immutable
/// values swapped under a per-table lock, so a reader never sees a row half
/// written. Contents live only as long as the process.
class DataGateway {
 public:
  DataGateway() = default;
  DataGateway(const DataGateway&) = delete;
  DataGateway& operator=(const DataGateway&) = delete;

  /// Creates the required tables and stores the initial parameters. Call
  /// once, before the first scan.
  void init(const Parameters& params, double now = 0.0);
  bool initialized() const;
  static const std::vector<std::string>& required_tables();
  static TableSchema schema_for(const std::string& table);

  void create_table(const std::string& name, TableSchema schema, double now = 0.0);
  bool has_table(const std::string& name) const;
  std::vector<std::string> table_names() const;

  void put(const std::string& table, const std::string& key, Record record);
  Record get(const std::string& table, const std::string& key) const;
  std::optional<Record> find(const std::string& table, const std::string& key) const;
  /// Rows in key order.
  std::vector<std::pair<std::string, Record>> list(const std::string& table) const;
  /// Returns false when the key was absent.
  bool erase(const std::string& table, const std::string& key);

  // Parameter changes (applied at the end of an iteration).
  /// Validates against the currently applied parameters; throws ValidationError.
  void enqueue_param_change(ParamChange change);
  std::vector<ParamChange> drain_param_changes();
  std::vector<ParamChange> pending_param_changes() const;
  Parameters applied_params() const;

  // Manual handoffs and channel changes (applied at the start of an iteration).
  CommandQueue<ManualHandoffRequest>& handoff_queue() { return handoffs_; }
  CommandQueue<ChannelChangeRequest>& channel_queue() { return channels_; }

 private:
  struct Table {
    TableSchema schema;
    double created_at = 0.0;
    mutable std::shared_mutex mutex;
    std::map<std::string, std::shared_ptr<const Record>> rows;
  };

  Table& table(const std::string& name) const;

  mutable std::shared_mutex tables_mutex_;
  std::map<std::string, std::unique_ptr<Table>> tables_;
  CommandQueue<ParamChange> params_;
  CommandQueue<ManualHandoffRequest> handoffs_;
  CommandQueue<ChannelChangeRequest> channels_;
};

}  // namespace sdwn
