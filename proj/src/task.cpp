#include "foreval/task.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "foreval/errors.hpp"
#include "yaml_detail.hpp"

namespace foreval {

namespace {

bool looks_like_integer(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

void check_quantile_levels(const std::vector<double>& q, const std::string& path) {
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] > 0.0 && q[i] < 1.0)) {
      throw Error(ErrorCode::kSchemaError,
                  path + "[" + std::to_string(i) + "] must lie strictly between 0 and 1");
    }
    if (i > 0 && !(q[i] > q[i - 1])) {
      throw Error(ErrorCode::kSchemaError, path + " must be strictly increasing");
    }
  }
}

Task task_from_yaml(const YAML::Node& node, const std::string& base_dir,
                    const std::string& path) {
  detail::check_keys(node,
                     {"task_name", "dataset", "horizon", "num_windows", "initial_cutoff",
                      "seasonality", "quantile_levels", "eval_metric", "quantile_metric"},
                     path);
  Task task;
  if (!node["task_name"]) {
    throw Error(ErrorCode::kSchemaError, "missing key '" + path + ".task_name'");
  }
  task.task_name = detail::get_string(node["task_name"], path + ".task_name");
  if (!node["dataset"]) {
    throw Error(ErrorCode::kSchemaError, "missing key '" + path + ".dataset'");
  }
  YAML::Node ds = node["dataset"];
  if (ds.IsScalar()) {
    // Path to a standalone manifest, relative to the benchmark file.
    std::filesystem::path p(detail::get_string(ds, path + ".dataset"));
    if (!p.is_absolute() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    task.dataset = parse_manifest(p);
  } else {
    task.dataset = detail::manifest_from_yaml(ds, base_dir, path + ".dataset");
  }
  if (!node["horizon"]) {
    throw Error(ErrorCode::kSchemaError, "missing key '" + path + ".horizon'");
  }
  std::int64_t h = detail::get_int(node["horizon"], path + ".horizon");
  if (h < 1) {
    throw Error(ErrorCode::kSchemaError, path + ".horizon must be >= 1");
  }
  task.horizon = static_cast<int>(h);
  if (node["num_windows"]) {
    std::int64_t w = detail::get_int(node["num_windows"], path + ".num_windows");
    if (w < 1) {
      throw Error(ErrorCode::kSchemaError, path + ".num_windows must be >= 1");
    }
    task.num_windows = static_cast<int>(w);
  }
  if (node["initial_cutoff"]) {
    std::string raw = detail::get_string(node["initial_cutoff"], path + ".initial_cutoff");
    if (looks_like_integer(raw)) {
      task.initial_cutoff_index = detail::get_int(node["initial_cutoff"], path + ".initial_cutoff");
    } else {
      parse_timestamp(raw);  // fail at parse time, not at run time
      task.initial_cutoff_timestamp = raw;
    }
  }
  if (node["seasonality"]) {
    std::int64_t m = detail::get_int(node["seasonality"], path + ".seasonality");
    if (m < 1) {
      throw Error(ErrorCode::kSchemaError, path + ".seasonality must be >= 1");
    }
    task.seasonality = static_cast<int>(m);
  } else {
    task.seasonality = default_seasonality(task.dataset.frequency);
  }
  if (node["quantile_levels"]) {
    task.quantile_levels =
        detail::get_double_list(node["quantile_levels"], path + ".quantile_levels");
    check_quantile_levels(task.quantile_levels, path + ".quantile_levels");
  } else {
    for (int i = 1; i <= 9; ++i) task.quantile_levels.push_back(i / 10.0);
  }
  auto metric_field = [&](const char* key, std::string& out) {
    if (!node[key]) return;
    out = detail::get_string(node[key], path + "." + key);
    if (!is_known_metric(out)) {
      throw Error(ErrorCode::kSchemaError,
                  path + "." + key + " must be one of mase, sql, wql, wape");
    }
  };
  metric_field("eval_metric", task.eval_metric);
  metric_field("quantile_metric", task.quantile_metric);
  return task;
}

}  // namespace

bool is_known_metric(const std::string& name) {
  return std::find(kMetricNames.begin(), kMetricNames.end(), name) != kMetricNames.end();
}

Benchmark parse_benchmark(const std::filesystem::path& yaml_path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(yaml_path.string());
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kSchemaError, yaml_path.string() + ": " + e.what());
  }
  detail::check_keys(root, {"name", "tasks"}, "benchmark");
  Benchmark b;
  if (root["name"]) b.name = detail::get_string(root["name"], "benchmark.name");
  if (!root["tasks"] || !root["tasks"].IsSequence()) {
    throw Error(ErrorCode::kSchemaError, "benchmark.tasks must be a list");
  }
  const std::string base_dir = yaml_path.parent_path().string();
  std::set<std::string> names;
  for (std::size_t i = 0; i < root["tasks"].size(); ++i) {
    Task t = task_from_yaml(root["tasks"][i], base_dir, "tasks[" + std::to_string(i) + "]");
    if (!names.insert(t.task_name).second) {
      throw Error(ErrorCode::kDuplicateTaskName, "task name '" + t.task_name + "' appears twice");
    }
    b.tasks.push_back(std::move(t));
  }
  if (b.tasks.empty()) {
    throw Error(ErrorCode::kSchemaError, "benchmark.tasks must not be empty");
  }
  return b;
}

std::vector<EvaluationWindow> generate_windows(const Task& task, std::size_t min_length) {
  const std::size_t h = static_cast<std::size_t>(task.horizon);
  const std::size_t min_cutoff = 2 * h + 1;
  const std::size_t l = min_length;
  std::vector<EvaluationWindow> windows;

  if (task.initial_cutoff_index) {
    std::int64_t first = *task.initial_cutoff_index;
    if (first < static_cast<std::int64_t>(min_cutoff)) {
      throw Error(ErrorCode::kNoFeasibleWindow,
                  "task '" + task.task_name + "': initial cutoff " + std::to_string(first) +
                      " leaves fewer than " + std::to_string(min_cutoff) +
                      " past observations");
    }
    std::size_t tau = static_cast<std::size_t>(first);
    for (int w = 1; w <= task.num_windows && tau + h <= l; ++w, tau += h) {
      windows.push_back({w, tau});
    }
    if (windows.empty()) {
      throw Error(ErrorCode::kNoFeasibleWindow,
                  "task '" + task.task_name + "': initial cutoff " + std::to_string(first) +
                      " plus horizon exceeds the shortest series (length " +
                      std::to_string(l) + ")");
    }
    return windows;
  }

  // Largest W' <= W with tau_1 = L - W'*H >= 2H+1, i.e. W' <= (L-(2H+1))/H.
  if (l < min_cutoff + h) {
    throw Error(ErrorCode::kNoFeasibleWindow,
                "task '" + task.task_name + "': series length " + std::to_string(l) +
                    " is below the minimum " + std::to_string(min_cutoff + h) +
                    " for horizon " + std::to_string(task.horizon));
  }
  const std::size_t max_windows = (l - min_cutoff) / h;
  const std::size_t w_eff = std::min<std::size_t>(static_cast<std::size_t>(task.num_windows),
                                                  max_windows);
  for (std::size_t w = 1; w <= w_eff; ++w) {
    windows.push_back({static_cast<int>(w), l - (w_eff - w + 1) * h});
  }
  return windows;
}

std::optional<std::int64_t> resolve_initial_cutoff(const Task& task,
                                                   const TimeSeriesDataset& ds) {
  if (task.initial_cutoff_index) return task.initial_cutoff_index;
  if (!task.initial_cutoff_timestamp) return std::nullopt;
  const std::int64_t cutoff_key =
      spacing_key(ds.frequency, parse_timestamp(*task.initial_cutoff_timestamp));
  std::int64_t min_count = -1;
  for (const Series& s : ds.series) {
    std::int64_t count = 0;
    for (std::size_t i = 0; i < s.length; ++i) {
      if (s.keys[i] <= cutoff_key) ++count;
    }
    if (min_count < 0 || count < min_count) min_count = count;
  }
  return min_count;
}

Task with_resolved_cutoff(const Task& task, const TimeSeriesDataset& ds) {
  Task out = task;
  if (!out.initial_cutoff_index && out.initial_cutoff_timestamp) {
    out.initial_cutoff_index = resolve_initial_cutoff(task, ds);
    out.initial_cutoff_timestamp.reset();
  }
  return out;
}

}  // namespace foreval
