#include "sdwn/gateway.hpp"

namespace sdwn {

namespace {

bool matches(const Record& value, FieldType type) {
  switch (type) {
    case FieldType::kString: return value.is_string();
    case FieldType::kNumber: return value.is_number();
    case FieldType::kInteger: return value.is_number_integer();
    case FieldType::kBoolean: return value.is_boolean();
    case FieldType::kArray: return value.is_array();
    case FieldType::kObject: return value.is_object();
  }
  return false;
}

const char* type_name(FieldType type) {
  switch (type) {
    case FieldType::kString: return "string";
    case FieldType::kNumber: return "number";
    case FieldType::kInteger: return "integer";
    case FieldType::kBoolean: return "boolean";
    case FieldType::kArray: return "array";
    case FieldType::kObject: return "object";
  }
  return "?";
}

}  // namespace

void TableSchema::validate(const Record& record) const {
  if (!record.is_object()) throw ValidationError("record must be an object");
  for (const auto& field : fields) {
    auto it = record.find(field.name);
    if (it == record.end()) throw ValidationError(field.name + ": missing required field");
    if (it->is_null() && field.nullable) continue;
    if (!matches(*it, field.type)) {
      throw ValidationError(field.name + ": expected " + type_name(field.type));
    }
  }
}

const std::vector<std::string>& DataGateway::required_tables() {
  static const std::vector<std::string> kTables = {
      tables::kClientsEver, tables::kStationsCurrent, tables::kAgents, tables::kMatrix,
      tables::kStats,       tables::kParams,          tables::kLastScans};
  return kTables;
}

// Table catalogue. docs/gateway.md mirrors this.
TableSchema DataGateway::schema_for(const std::string& table) {
  using F = FieldType;
  if (table == tables::kClientsEver) {
    return {{{"mac", F::kString},
             {"bssid", F::kString},
             {"first_seen", F::kNumber},
             {"last_seen", F::kNumber},
             {"connected", F::kBoolean}}};
  }
  if (table == tables::kStationsCurrent) {
    return {{{"mac", F::kString},
             {"bssid", F::kString},
             {"host", F::kString},
             {"rssi", F::kNumber, true}}};
  }
  if (table == tables::kAgents) {
    return {{{"ip", F::kString},
             {"mac", F::kString},
             {"channel", F::kInteger},
             {"lvaps", F::kInteger},
             {"last_heartbeat", F::kNumber}}};
  }
  if (table == tables::kMatrix) {
    return {{{"aps", F::kArray}, {"stas", F::kArray}, {"cells", F::kArray}, {"timestamp", F::kNumber}}};
  }
  if (table == tables::kStats) {
    return {{{"ap", F::kString}, {"timestamp", F::kNumber}, {"stations", F::kArray}}};
  }
  if (table == tables::kParams) {
    return {{{"alpha", F::kNumber},
             {"scan_interval", F::kNumber},
             {"hysteresis", F::kNumber},
             {"load_penalty_beta", F::kNumber},
             {"stale_scans_limit", F::kInteger},
             {"scan_duration", F::kNumber}}};
  }
  if (table == tables::kLastScans) {
    return {{{"ap", F::kObject},
             {"channel", F::kInteger},
             {"timestamp", F::kNumber},
             {"observations", F::kArray}}};
  }
  return {};
}

void DataGateway::init(const Parameters& params, double now) {
  params.validate();
  for (const auto& name : required_tables()) create_table(name, schema_for(name), now);
  put(tables::kParams, "applied", json(params));
  put(tables::kMatrix, "current",
      {{"aps", json::array()}, {"stas", json::array()}, {"cells", json::array()},
       {"timestamp", now}});
}

bool DataGateway::initialized() const {
  std::shared_lock lock(tables_mutex_);
  for (const auto& name : required_tables()) {
    if (!tables_.contains(name)) return false;
  }
  return true;
}

void DataGateway::create_table(const std::string& name, TableSchema schema, double now) {
  std::unique_lock lock(tables_mutex_);
  if (tables_.contains(name)) throw AlreadyExistsError("table '" + name + "' already exists");
  auto t = std::make_unique<Table>();
  t->schema = std::move(schema);
  t->created_at = now;
  tables_.emplace(name, std::move(t));
}

bool DataGateway::has_table(const std::string& name) const {
  std::shared_lock lock(tables_mutex_);
  return tables_.contains(name);
}

std::vector<std::string> DataGateway::table_names() const {
  std::shared_lock lock(tables_mutex_);
  std::vector<std::string> out;
  for (const auto& [name, _] : tables_) out.push_back(name);
  return out;
}

DataGateway::Table& DataGateway::table(const std::string& name) const {
  std::shared_lock lock(tables_mutex_);
  auto it = tables_.find(name);
  if (it == tables_.end()) throw NotFoundError("unknown table '" + name + "'");
  return *it->second;
}

void DataGateway::put(const std::string& table_name, const std::string& key, Record record) {
  auto& t = table(table_name);
  t.schema.validate(record);
  auto row = std::make_shared<const Record>(std::move(record));
  std::unique_lock lock(t.mutex);
  t.rows[key] = std::move(row);
}

std::optional<Record> DataGateway::find(const std::string& table_name,
                                        const std::string& key) const {
  auto& t = table(table_name);
  std::shared_ptr<const Record> row;
  {
    std::shared_lock lock(t.mutex);
    auto it = t.rows.find(key);
    if (it == t.rows.end()) return std::nullopt;
    row = it->second;
  }
  return *row;
}

Record DataGateway::get(const std::string& table_name, const std::string& key) const {
  auto row = find(table_name, key);
  if (!row) throw NotFoundError("no row '" + key + "' in table '" + table_name + "'");
  return std::move(*row);
}

std::vector<std::pair<std::string, Record>> DataGateway::list(const std::string& table_name) const {
  auto& t = table(table_name);
  std::vector<std::pair<std::string, std::shared_ptr<const Record>>> rows;
  {
    std::shared_lock lock(t.mutex);
    rows.assign(t.rows.begin(), t.rows.end());
  }
  std::vector<std::pair<std::string, Record>> out;
  out.reserve(rows.size());
  for (auto& [key, row] : rows) out.emplace_back(key, *row);
  return out;
}

bool DataGateway::erase(const std::string& table_name, const std::string& key) {
  auto& t = table(table_name);
  std::unique_lock lock(t.mutex);
  return t.rows.erase(key) > 0;
}

Parameters DataGateway::applied_params() const {
  return get(tables::kParams, "applied").get<Parameters>();
}

void DataGateway::enqueue_param_change(ParamChange change) {
  // Validate against the record as it will be once the queue ahead of this
  // change has been applied.
  Parameters projected = applied_params();
  for (const auto& pending : params_.snapshot()) {
    try {
      projected.set(pending.name, pending.value);
    } catch (const ValidationError&) {
    }
  }
  validate_param_change(projected, change);
  params_.push(std::move(change));
}

std::vector<ParamChange> DataGateway::drain_param_changes() { return params_.drain(); }

std::vector<ParamChange> DataGateway::pending_param_changes() const { return params_.snapshot(); }

}  // namespace sdwn
