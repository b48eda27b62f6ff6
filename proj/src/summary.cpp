#include "foreval/summary.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "foreval/errors.hpp"
#include "foreval/util/io.hpp"
#include "foreval/util/json_writer.hpp"

namespace foreval {

namespace {

void write_spec_echo(JsonWriter& w, const EvaluationSummary& s) {
  w.key("dataset_path").value(s.dataset_path);
  w.key("frequency").value(s.frequency);
  w.key("horizon").value(s.horizon);
  w.key("num_windows").value(s.num_windows);
  w.key("cutoffs").begin_array();
  for (std::int64_t c : s.cutoffs) w.value(c);
  w.end_array();
  w.key("seasonality").value(s.seasonality);
  w.key("quantile_levels").begin_array();
  for (double q : s.quantile_levels) w.value(q);
  w.end_array();
  w.key("eval_metric").value(s.eval_metric);
  w.key("quantile_metric").value(s.quantile_metric);
}

EvaluationSummary spec_echo(const Task& task) {
  EvaluationSummary s;
  s.task_name = task.task_name;
  s.dataset_path = task.dataset.data_path;
  s.frequency = task.dataset.frequency;
  s.horizon = task.horizon;
  s.seasonality = task.seasonality;
  s.quantile_levels = task.quantile_levels;
  s.eval_metric = task.eval_metric;
  s.quantile_metric = task.quantile_metric;
  return s;
}

}  // namespace

EvaluationSummary summarize(const Task& task, const std::vector<EvaluationWindow>& windows,
                            const std::vector<std::map<std::string, double>>& window_scores,
                            const std::string& model_name, double runtime_s,
                            bool trained_on_this_dataset) {
  if (windows.empty() || window_scores.size() != windows.size()) {
    throw Error(ErrorCode::kWindowCountMismatch,
                "task '" + task.task_name + "': " + std::to_string(window_scores.size()) +
                    " scored windows for " + std::to_string(windows.size()) + " cutoffs");
  }
  EvaluationSummary s = spec_echo(task);
  s.model_name = model_name;
  s.num_windows = static_cast<int>(windows.size());
  for (const EvaluationWindow& w : windows) {
    s.cutoffs.push_back(static_cast<std::int64_t>(w.cutoff));
  }
  s.runtime_s = runtime_s;
  s.trained_on_this_dataset = trained_on_this_dataset;

  for (const auto& [metric, value] : window_scores.front()) {
    (void)value;
    s.window_metrics[metric] = {};
  }
  for (std::size_t w = 0; w < window_scores.size(); ++w) {
    if (window_scores[w].size() != s.window_metrics.size()) {
      throw Error(ErrorCode::kWindowCountMismatch,
                  "task '" + task.task_name + "': window " + std::to_string(w + 1) +
                      " reports a different metric set");
    }
    for (const auto& [metric, value] : window_scores[w]) {
      auto it = s.window_metrics.find(metric);
      if (it == s.window_metrics.end()) {
        throw Error(ErrorCode::kWindowCountMismatch,
                    "task '" + task.task_name + "': window " + std::to_string(w + 1) +
                        " reports a different metric set");
      }
      it->second.push_back(value);
    }
  }
  for (const auto& [metric, values] : s.window_metrics) {
    double sum = 0.0;
    for (double v : values) sum += v;
    s.task_metrics[metric] = sum / static_cast<double>(values.size());
  }
  return s;
}

EvaluationSummary failed_summary(const Task& task, const std::string& model_name,
                                 const std::string& reason) {
  EvaluationSummary s = spec_echo(task);
  s.model_name = model_name;
  s.failed = true;
  s.failure_reason = reason;
  return s;
}

std::string to_json_line(const EvaluationSummary& s) {
  JsonWriter w;
  w.begin_object();
  w.key("task_name").value(s.task_name);
  w.key("model_name").value(s.model_name);
  write_spec_echo(w, s);
  w.key("trained_on_this_dataset").value(s.trained_on_this_dataset);
  w.key("runtime_s").value(s.runtime_s);
  w.key("failed").value(s.failed);
  if (s.failed) {
    w.key("failure_reason").value(s.failure_reason);
  } else {
    w.key("window_metrics").begin_object();
    for (const auto& [metric, values] : s.window_metrics) {
      w.key(metric).begin_array();
      for (double v : values) w.value(v);
      w.end_array();
    }
    w.end_object();
    w.key("task_metrics").begin_object();
    for (const auto& [metric, value] : s.task_metrics) {
      w.key(metric).value(value);
    }
    w.end_object();
  }
  w.end_object();
  return w.take();
}

EvaluationSummary summary_from_json(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kDataError, std::string("bad summary line: ") + ex.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::kDataError, "summary line is not a JSON object");
  }
  auto require = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) {
      throw Error(ErrorCode::kDataError, std::string("summary line lacks '") + key + "'");
    }
    return *it;
  };
  try {
    EvaluationSummary s;
    s.task_name = require("task_name").get<std::string>();
    s.model_name = require("model_name").get<std::string>();
    s.dataset_path = require("dataset_path").get<std::string>();
    s.frequency = require("frequency").get<std::string>();
    s.horizon = require("horizon").get<int>();
    s.num_windows = require("num_windows").get<int>();
    for (const auto& c : require("cutoffs")) s.cutoffs.push_back(c.get<std::int64_t>());
    s.seasonality = require("seasonality").get<int>();
    for (const auto& q : require("quantile_levels")) {
      s.quantile_levels.push_back(q.get<double>());
    }
    s.eval_metric = require("eval_metric").get<std::string>();
    s.quantile_metric = require("quantile_metric").get<std::string>();
    s.trained_on_this_dataset = require("trained_on_this_dataset").get<bool>();
    const nlohmann::json& rt = require("runtime_s");
    s.runtime_s = rt.is_null() ? std::numeric_limits<double>::quiet_NaN() : rt.get<double>();
    s.failed = require("failed").get<bool>();
    if (s.failed) {
      s.failure_reason = require("failure_reason").get<std::string>();
    } else {
      for (const auto& [metric, values] : require("window_metrics").items()) {
        std::vector<double>& out = s.window_metrics[metric];
        for (const auto& v : values) out.push_back(v.get<double>());
      }
      for (const auto& [metric, value] : require("task_metrics").items()) {
        s.task_metrics[metric] = value.get<double>();
      }
    }
    return s;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kDataError, std::string("bad summary line: ") + ex.what());
  }
}

void write_summaries(const std::vector<EvaluationSummary>& summaries,
                     const std::filesystem::path& path) {
  std::string out;
  for (const EvaluationSummary& s : summaries) {
    out += to_json_line(s);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<EvaluationSummary> read_summaries(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<EvaluationSummary> out;
  for (const std::string& line : split_lines(text)) {
    if (line.empty()) continue;
    out.push_back(summary_from_json(line));
  }
  return out;
}

TaskScore to_task_score(const EvaluationSummary& s) {
  TaskScore score;
  score.task_name = s.task_name;
  score.model_name = s.model_name;
  score.metrics = s.task_metrics;
  score.eval_metric = s.eval_metric;
  score.runtime_s = s.runtime_s;
  score.leaked = s.trained_on_this_dataset;
  score.failed = s.failed;
  score.failure_reason = s.failure_reason;
  JsonWriter w;
  w.begin_object();
  write_spec_echo(w, s);
  w.end_object();
  score.task_digest = w.take();
  return score;
}

}  // namespace foreval
