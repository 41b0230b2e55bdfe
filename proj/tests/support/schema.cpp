#include "schema.hpp"

#include <fstream>
#include <regex>

namespace sdwn::testing {

namespace {

bool has_type(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

void check(const json& schema, const json& value, const json& root, const std::string& at,
           std::vector<std::string>& errors) {
  if (auto ref = schema.find("$ref"); ref != schema.end()) {
    const auto name = ref->get<std::string>().substr(std::string("#/definitions/").size());
    check(root.at("definitions").at(name), value, root, at, errors);
    return;
  }
  if (auto type = schema.find("type"); type != schema.end()) {
    bool ok = false;
    if (type->is_array()) {
      for (const auto& t : *type) ok = ok || has_type(value, t.get<std::string>());
    } else {
      ok = has_type(value, type->get<std::string>());
    }
    if (!ok) {
      errors.push_back(at + ": expected type " + type->dump() + ", got " + value.dump());
      return;
    }
  }
  if (auto e = schema.find("enum"); e != schema.end()) {
    if (std::find(e->begin(), e->end(), value) == e->end()) {
      errors.push_back(at + ": " + value.dump() + " not in " + e->dump());
    }
  }
  if (value.is_number()) {
    if (auto m = schema.find("minimum"); m != schema.end() && value.get<double>() < m->get<double>()) {
      errors.push_back(at + ": below minimum");
    }
    if (auto m = schema.find("maximum"); m != schema.end() && value.get<double>() > m->get<double>()) {
      errors.push_back(at + ": above maximum");
    }
  }
  if (value.is_string()) {
    if (auto p = schema.find("pattern"); p != schema.end()) {
      if (!std::regex_search(value.get<std::string>(), std::regex(p->get<std::string>()))) {
        errors.push_back(at + ": '" + value.get<std::string>() + "' does not match " + p->dump());
      }
    }
  }
  if (value.is_object()) {
    if (auto req = schema.find("required"); req != schema.end()) {
      for (const auto& name : *req) {
        if (!value.contains(name.get<std::string>())) {
          errors.push_back(at + ": missing " + name.get<std::string>());
        }
      }
    }
    const auto props = schema.find("properties");
    for (const auto& [key, v] : value.items()) {
      if (props != schema.end() && props->contains(key)) {
        check((*props)[key], v, root, at + "." + key, errors);
      } else if (schema.value("additionalProperties", true) == false) {
        errors.push_back(at + ": unexpected property " + key);
      }
    }
  }
  if (value.is_array()) {
    if (auto items = schema.find("items"); items != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        check(*items, value[i], root, at + "[" + std::to_string(i) + "]", errors);
      }
    }
  }
}

}  // namespace

std::vector<std::string> validate_schema(const json& schema, const json& value, const json& root) {
  std::vector<std::string> errors;
  check(schema, value, root, "$", errors);
  return errors;
}

const json& api_schema() {
  static const json schema = [] {
    std::ifstream in(std::string(SDWN_SOURCE_DIR) + "/docs/api-schema.json");
    if (!in) throw NotFoundError("docs/api-schema.json not found");
    return json::parse(in);
  }();
  return schema;
}

std::vector<std::string> validate_api(const std::string& definition, const json& value) {
  const auto& root = api_schema();
  if (!root.at("definitions").contains(definition)) {
    return {"no schema definition named " + definition};
  }
  return validate_schema(root["definitions"][definition], value, root);
}

}  // namespace sdwn::testing
