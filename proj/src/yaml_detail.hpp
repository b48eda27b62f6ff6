#ifndef FOREVAL_SRC_YAML_DETAIL_HPP
#define FOREVAL_SRC_YAML_DETAIL_HPP

#include <yaml-cpp/yaml.h>

#include <string>
#include <vector>

#include "foreval/dataset.hpp"

// Shared YAML plumbing for manifest and benchmark files. Every schema error
// names the offending key path (e.g. "tasks[2].quantile_levels").

namespace foreval::detail {

// Rejects nodes that are not maps and keys outside `allowed`.
void check_keys(const YAML::Node& node, const std::vector<std::string>& allowed,
                const std::string& path);

std::string get_string(const YAML::Node& node, const std::string& path);
std::int64_t get_int(const YAML::Node& node, const std::string& path);
double get_double(const YAML::Node& node, const std::string& path);
std::vector<std::string> get_string_list(const YAML::Node& node, const std::string& path);
std::vector<double> get_double_list(const YAML::Node& node, const std::string& path);

DatasetManifest manifest_from_yaml(const YAML::Node& node, const std::string& base_dir,
                                   const std::string& path);

}  // namespace foreval::detail

#endif  // FOREVAL_SRC_YAML_DETAIL_HPP
