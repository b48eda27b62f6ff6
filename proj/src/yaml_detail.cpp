#include "yaml_detail.hpp"

#include <set>

#include "foreval/errors.hpp"

namespace foreval::detail {

void check_keys(const YAML::Node& node, const std::vector<std::string>& allowed,
                const std::string& path) {
  if (!node.IsMap()) {
    throw Error(ErrorCode::kSchemaError, path + " must be a mapping");
  }
  std::set<std::string> allowed_set(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed_set.count(key)) {
      throw Error(ErrorCode::kSchemaError, "unknown key '" + path + "." + key + "'");
    }
  }
}

std::string get_string(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) {
    throw Error(ErrorCode::kSchemaError, path + " must be a string");
  }
  return node.as<std::string>();
}

std::int64_t get_int(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) {
    throw Error(ErrorCode::kSchemaError, path + " must be an integer");
  }
  try {
    return node.as<std::int64_t>();
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::kSchemaError, path + " must be an integer, got '" +
                                             node.as<std::string>() + "'");
  }
}

double get_double(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) {
    throw Error(ErrorCode::kSchemaError, path + " must be a number");
  }
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::kSchemaError, path + " must be a number, got '" +
                                             node.as<std::string>() + "'");
  }
}

std::vector<std::string> get_string_list(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) {
    throw Error(ErrorCode::kSchemaError, path + " must be a list of strings");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(get_string(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<double> get_double_list(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) {
    throw Error(ErrorCode::kSchemaError, path + " must be a list of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(get_double(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

DatasetManifest manifest_from_yaml(const YAML::Node& node, const std::string& base_dir,
                                   const std::string& path) {
  check_keys(node,
             {"data_path", "format", "id_column", "timestamp_column", "frequency",
              "target_columns", "past_dynamic_columns", "known_dynamic_columns",
              "static_columns"},
             path);
  auto require = [&](const char* key) {
    YAML::Node n = node[key];
    if (!n) {
      throw Error(ErrorCode::kSchemaError, "missing key '" + path + "." + key + "'");
    }
    return n;
  };
  DatasetManifest m;
  m.base_dir = base_dir;
  m.data_path = get_string(require("data_path"), path + ".data_path");
  m.format = get_string(require("format"), path + ".format");
  m.id_column = get_string(require("id_column"), path + ".id_column");
  m.timestamp_column = get_string(require("timestamp_column"), path + ".timestamp_column");
  m.frequency = get_string(require("frequency"), path + ".frequency");
  m.target_columns = get_string_list(require("target_columns"), path + ".target_columns");
  if (node["past_dynamic_columns"]) {
    m.past_dynamic_columns =
        get_string_list(node["past_dynamic_columns"], path + ".past_dynamic_columns");
  }
  if (node["known_dynamic_columns"]) {
    m.known_dynamic_columns =
        get_string_list(node["known_dynamic_columns"], path + ".known_dynamic_columns");
  }
  if (node["static_columns"]) {
    m.static_columns = get_string_list(node["static_columns"], path + ".static_columns");
  }
  check_manifest(m);
  return m;
}

}  // namespace foreval::detail
