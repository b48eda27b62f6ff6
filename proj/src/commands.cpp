#include "foreval/commands.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "foreval/aggregate.hpp"
#include "foreval/baselines.hpp"
#include "foreval/dataset.hpp"
#include "foreval/errors.hpp"
#include "foreval/metrics.hpp"
#include "foreval/summary.hpp"
#include "foreval/task.hpp"
#include "foreval/util/io.hpp"
#include "foreval/util/json_writer.hpp"

namespace foreval {

namespace {

namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string brief(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Wall-clock runtimes land in the leaderboard at one decimal so reruns of a
// deterministic pipeline produce identical artifacts.
double round_runtime(double v) { return std::round(v * 10.0) / 10.0; }

std::string format_cutoffs(const std::vector<EvaluationWindow>& windows) {
  std::string out = "[";
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(windows[i].cutoff);
  }
  out += "]";
  return out;
}

// Dataset, resolved task, and windows for one benchmark task.
struct TaskRun {
  TimeSeriesDataset ds;
  Task resolved;
  std::vector<EvaluationWindow> windows;
};

TaskRun prepare_task(const Task& task) {
  TaskRun run;
  run.ds = load_dataset(task.dataset);
  run.resolved = with_resolved_cutoff(task, run.ds);
  run.windows = generate_windows(run.resolved, run.ds.min_length());
  return run;
}

int run_with_jobs(std::size_t n_items, int jobs, const std::function<void(std::size_t)>& work) {
  const int effective = std::max(1, jobs);
  if (effective == 1 || n_items < 2) {
    for (std::size_t i = 0; i < n_items; ++i) work(i);
    return effective;
  }
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next.fetch_add(1); i < n_items; i = next.fetch_add(1)) work(i);
  };
  std::vector<std::thread> workers;
  const int n_threads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(effective), n_items));
  for (int t = 0; t < n_threads; ++t) workers.emplace_back(loop);
  for (auto& w : workers) w.join();
  return effective;
}

}  // namespace

int cmd_validate(const ValidateOptions& opts) {
  const Benchmark bench = parse_benchmark(opts.benchmark_path);
  std::size_t infeasible = 0;
  for (const Task& task : bench.tasks) {
    try {
      TimeSeriesDataset ds = load_dataset(task.dataset);
      Task resolved = with_resolved_cutoff(task, ds);
      ValidationReport report = validate_dataset(ds, resolved);
      std::string detail;
      bool ok = report.ok();
      if (ok) {
        std::vector<EvaluationWindow> windows = generate_windows(resolved, ds.min_length());
        detail = std::to_string(ds.num_series()) + " series, min length " +
                 std::to_string(ds.min_length()) + ", cutoffs " + format_cutoffs(windows);
      } else {
        for (const Defect& d : report.defects) {
          if (d.blocking) {
            detail = d.message;
            break;
          }
        }
      }
      std::cout << "task " << task.task_name << ": " << (ok ? "OK" : "FAIL") << " (" << detail
                << ")\n";
      for (const Defect& d : report.defects) {
        std::cout << "  " << (d.blocking ? "defect" : "note") << ": " << d.message << "\n";
      }
      if (!ok) ++infeasible;
    } catch (const Error& ex) {
      std::cout << "task " << task.task_name << ": FAIL (" << ex.what() << ")\n";
      ++infeasible;
    }
  }
  if (infeasible == 0) {
    std::cout << "benchmark " << bench.name << ": " << bench.tasks.size()
              << " task(s) feasible\n";
    return 0;
  }
  std::cout << "benchmark " << bench.name << ": " << infeasible << " of " << bench.tasks.size()
            << " task(s) infeasible\n";
  return 1;
}

namespace {

// Submission records for one task's forecasts of one baseline, one line per
// (window, item, dim).
std::string forecast_records(const TaskRun& run, const std::vector<ForecastSet>& per_window,
                             double runtime_s) {
  std::string out;
  for (std::size_t w = 0; w < per_window.size(); ++w) {
    const ForecastSet& f = per_window[w];
    for (std::size_t n = 0; n < f.num_series; ++n) {
      for (std::size_t d = 0; d < f.num_dims; ++d) {
        JsonWriter jw;
        jw.begin_object();
        jw.key("task_name").value(run.resolved.task_name);
        jw.key("window_index").value(run.windows[w].index);
        jw.key("item_id").value(run.ds.series[n].item_id);
        jw.key("dim_index").value(d);
        jw.key("model_name").value(f.model_name);
        jw.key("runtime_s").value(runtime_s);
        jw.key("point").begin_array();
        const double* p = f.point(n, d);
        for (std::size_t t = 0; t < f.horizon; ++t) jw.value(p[t]);
        jw.end_array();
        jw.key("quantiles").begin_object();
        for (std::size_t qi = 0; qi < f.quantile_levels.size(); ++qi) {
          jw.key(JsonWriter::number(f.quantile_levels[qi])).begin_array();
          const double* q = f.quantile(n, d, qi);
          for (std::size_t t = 0; t < f.horizon; ++t) jw.value(q[t]);
          jw.end_array();
        }
        jw.end_object();
        jw.end_object();
        out += jw.take();
        out += '\n';
      }
    }
  }
  return out;
}

struct BaselineTaskResult {
  std::vector<EvaluationSummary> summaries;    // one per requested baseline
  std::vector<std::string> forecast_payloads;  // one per baseline when dumping
  std::vector<std::string> log_lines;
};

BaselineTaskResult evaluate_task_baselines(const Task& task,
                                           const std::vector<BaselineKind>& kinds, bool dump) {
  BaselineTaskResult res;
  std::optional<TaskRun> run;
  std::string prep_error;
  try {
    run.emplace(prepare_task(task));
  } catch (const Error& ex) {
    prep_error = ex.what();
  }
  for (BaselineKind kind : kinds) {
    const std::string name = baseline_name(kind);
    if (!run) {
      res.summaries.push_back(failed_summary(task, name, prep_error));
      res.forecast_payloads.emplace_back();
      res.log_lines.push_back("task " + task.task_name + ": " + name + " FAILED (" +
                              prep_error + ")");
      continue;
    }
    try {
      const auto start = std::chrono::steady_clock::now();
      std::vector<std::map<std::string, double>> window_scores;
      std::vector<ForecastSet> forecasts;
      for (const EvaluationWindow& w : run->windows) {
        WindowSlice slice = slice_window(run->ds, w, run->resolved);
        ForecastSet f = run_baseline(kind, slice.input(), run->resolved);
        window_scores.push_back(score_window(slice, f, run->resolved));
        if (dump) forecasts.push_back(std::move(f));
      }
      const double runtime = seconds_since(start);
      EvaluationSummary s =
          summarize(run->resolved, run->windows, window_scores, name, runtime, false);
      res.log_lines.push_back("task " + task.task_name + ": " + name + " " +
                              s.eval_metric + "=" + brief(s.task_metrics.at(s.eval_metric)) +
                              " " + s.quantile_metric + "=" +
                              brief(s.task_metrics.at(s.quantile_metric)) + " (" +
                              brief(runtime) + " s)");
      res.summaries.push_back(std::move(s));
      res.forecast_payloads.push_back(dump ? forecast_records(*run, forecasts, runtime)
                                           : std::string());
    } catch (const Error& ex) {
      res.summaries.push_back(failed_summary(run->resolved, name, ex.what()));
      res.forecast_payloads.emplace_back();
      res.log_lines.push_back("task " + task.task_name + ": " + name + " FAILED (" +
                              ex.what() + ")");
    }
  }
  return res;
}

}  // namespace

int cmd_run_baselines(const RunBaselinesOptions& opts) {
  const Benchmark bench = parse_benchmark(opts.benchmark_path);
  std::vector<BaselineKind> kinds;
  if (opts.baselines.empty()) {
    kinds = kAllBaselines;
  } else {
    for (const std::string& name : opts.baselines) {
      std::optional<BaselineKind> kind = baseline_from_name(name);
      if (!kind) {
        throw Error(ErrorCode::kSchemaError, "unknown baseline '" + name + "'");
      }
      if (std::find(kinds.begin(), kinds.end(), *kind) != kinds.end()) {
        throw Error(ErrorCode::kSchemaError, "baseline '" + name + "' given twice");
      }
      kinds.push_back(*kind);
    }
  }

  const bool dump = !opts.dump_forecasts_dir.empty();
  std::vector<BaselineTaskResult> results(bench.tasks.size());
  run_with_jobs(bench.tasks.size(), opts.jobs, [&](std::size_t i) {
    results[i] = evaluate_task_baselines(bench.tasks[i], kinds, dump);
  });

  for (const BaselineTaskResult& r : results) {
    for (const std::string& line : r.log_lines) std::cout << line << "\n";
  }

  fs::create_directories(opts.out_dir);
  if (dump) fs::create_directories(opts.dump_forecasts_dir);
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const std::string name = baseline_name(kinds[k]);
    std::vector<EvaluationSummary> lines;
    lines.reserve(results.size());
    for (const BaselineTaskResult& r : results) lines.push_back(r.summaries[k]);
    const fs::path out_path = fs::path(opts.out_dir) / (name + ".jsonl");
    write_summaries(lines, out_path);
    std::cout << "wrote " << out_path.string() << "\n";
    if (dump) {
      std::string payload;
      for (const BaselineTaskResult& r : results) payload += r.forecast_payloads[k];
      const fs::path fc_path = fs::path(opts.dump_forecasts_dir) / (name + "_forecasts.jsonl");
      write_file_atomic(fc_path, payload);
      std::cout << "wrote " << fc_path.string() << "\n";
    }
  }
  return 0;
}

namespace {

struct SubmissionForecast {
  int window_index = 0;
  std::string item_id;
  std::size_t dim_index = 0;
  std::vector<double> point;                                 // empty = absent
  std::vector<std::pair<double, std::vector<double>>> quantiles;  // sorted by level
  std::size_t line_no = 0;
};

struct SubmissionTask {
  bool declared_failed = false;
  std::string failure_reason;
  std::optional<bool> leaked;
  std::optional<double> runtime_s;
  std::vector<SubmissionForecast> records;
};

struct ParsedSubmission {
  std::string model_name;
  std::map<std::string, SubmissionTask> tasks;
};

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kDataError,
              "submission line " + std::to_string(line_no) + ": " + what);
}

double parse_level_key(const std::string& key, std::size_t line_no) {
  const char* begin = key.c_str();
  char* end = nullptr;
  errno = 0;
  const double q = std::strtod(begin, &end);
  if (end != begin + key.size() || key.empty() || errno == ERANGE || !(q > 0.0 && q < 1.0)) {
    line_error(line_no, "quantile key '" + key + "' is not a level in (0,1)");
  }
  return q;
}

ParsedSubmission parse_submission(const fs::path& path) {
  const std::string text = read_file(path);
  ParsedSubmission sub;
  std::size_t line_no = 0;
  for (const std::string& line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      line_error(line_no, std::string("bad JSON: ") + ex.what());
    }
    if (!j.is_object()) line_error(line_no, "record is not a JSON object");
    try {
      auto it = j.find("task_name");
      if (it == j.end() || !it->is_string()) line_error(line_no, "missing task_name");
      const std::string task_name = it->get<std::string>();
      it = j.find("model_name");
      if (it == j.end() || !it->is_string()) line_error(line_no, "missing model_name");
      const std::string model_name = it->get<std::string>();
      if (sub.model_name.empty()) {
        sub.model_name = model_name;
      } else if (sub.model_name != model_name) {
        line_error(line_no, "a submission holds one model, found '" + sub.model_name +
                                "' and '" + model_name + "'");
      }
      SubmissionTask& task = sub.tasks[task_name];

      if (j.contains("trained_on_this_dataset")) {
        const bool flag = j.at("trained_on_this_dataset").get<bool>();
        if (task.leaked.has_value() && *task.leaked != flag) {
          throw Error(ErrorCode::kConflictingLeakageFlag,
                      "task '" + task_name +
                          "': records disagree on trained_on_this_dataset");
        }
        task.leaked = flag;
      }
      if (j.contains("runtime_s")) {
        const double rt = j.at("runtime_s").get<double>();
        if (!(rt >= 0.0) || std::isinf(rt)) {
          line_error(line_no, "runtime_s must be a finite non-negative number");
        }
        if (task.runtime_s.has_value() && *task.runtime_s != rt) {
          line_error(line_no, "task '" + task_name + "': records disagree on runtime_s");
        }
        task.runtime_s = rt;
      }

      if (j.contains("failed") && j.at("failed").get<bool>()) {
        auto reason_it = j.find("reason");
        if (reason_it == j.end() || !reason_it->is_string()) {
          line_error(line_no, "failure record needs a reason string");
        }
        const std::string reason = reason_it->get<std::string>();
        if (task.declared_failed && task.failure_reason != reason) {
          line_error(line_no, "task '" + task_name + "': conflicting failure declarations");
        }
        task.declared_failed = true;
        task.failure_reason = reason;
        continue;
      }

      SubmissionForecast rec;
      rec.line_no = line_no;
      it = j.find("window_index");
      if (it == j.end() || !it->is_number_integer()) line_error(line_no, "missing window_index");
      rec.window_index = it->get<int>();
      if (rec.window_index < 1) line_error(line_no, "window_index must be >= 1");
      it = j.find("item_id");
      if (it == j.end()) line_error(line_no, "missing item_id");
      if (it->is_string()) {
        rec.item_id = it->get<std::string>();
      } else if (it->is_number_integer()) {
        rec.item_id = std::to_string(it->get<std::int64_t>());
      } else {
        line_error(line_no, "item_id must be a string or integer");
      }
      if (j.contains("dim_index")) {
        const std::int64_t d = j.at("dim_index").get<std::int64_t>();
        if (d < 0) line_error(line_no, "dim_index must be >= 0");
        rec.dim_index = static_cast<std::size_t>(d);
      }
      if (j.contains("point")) {
        for (const auto& v : j.at("point")) {
          const double x = v.get<double>();
          if (std::isnan(x) || std::isinf(x)) line_error(line_no, "non-finite point forecast");
          rec.point.push_back(x);
        }
        if (rec.point.empty()) line_error(line_no, "empty point array");
      }
      if (j.contains("quantiles")) {
        for (const auto& [key, arr] : j.at("quantiles").items()) {
          const double q = parse_level_key(key, line_no);
          std::vector<double> values;
          for (const auto& v : arr) {
            const double x = v.get<double>();
            if (std::isnan(x) || std::isinf(x)) {
              line_error(line_no, "non-finite quantile forecast");
            }
            values.push_back(x);
          }
          rec.quantiles.emplace_back(q, std::move(values));
        }
        std::sort(rec.quantiles.begin(), rec.quantiles.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < rec.quantiles.size(); ++i) {
          if (rec.quantiles[i].first == rec.quantiles[i - 1].first) {
            line_error(line_no, "duplicate quantile level");
          }
        }
      }
      if (rec.point.empty() && rec.quantiles.empty()) {
        line_error(line_no, "record carries neither point nor quantiles");
      }
      task.records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& ex) {
      line_error(line_no, std::string("bad field: ") + ex.what());
    }
  }
  if (sub.tasks.empty()) {
    throw Error(ErrorCode::kDataError, "submission has no records: " + path.string());
  }
  for (const auto& [name, task] : sub.tasks) {
    if (task.declared_failed && !task.records.empty()) {
      throw Error(ErrorCode::kDataError,
                  "task '" + name + "' declares failure but also submits forecasts");
    }
  }
  return sub;
}

EvaluationSummary score_submission_task(const TaskRun& run, const SubmissionTask& td,
                                        const std::string& model_name) {
  const Task& task = run.resolved;
  const std::size_t n_series = run.ds.num_series();
  const std::size_t n_dims = run.ds.num_dims();
  const std::size_t horizon = static_cast<std::size_t>(task.horizon);
  const std::size_t n_windows = run.windows.size();

  std::map<std::string, std::size_t> series_index;
  for (std::size_t n = 0; n < n_series; ++n) series_index[run.ds.series[n].item_id] = n;

  // The first record fixes the submission's shape: point presence and the
  // exact level set must be uniform across the task.
  const SubmissionForecast& first = td.records.front();
  const bool has_points = !first.point.empty();
  std::vector<double> levels;
  for (const auto& [q, values] : first.quantiles) {
    (void)values;
    levels.push_back(q);
  }

  std::vector<ForecastSet> sets(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    ForecastSet& f = sets[w];
    f.model_name = model_name;
    f.num_series = n_series;
    f.num_dims = n_dims;
    f.horizon = horizon;
    f.quantile_levels = levels;
    f.has_points = has_points;
    if (has_points) {
      f.points.assign(f.cell_count(), std::numeric_limits<double>::quiet_NaN());
    }
    f.quantiles.assign(f.cell_count() * levels.size(),
                       std::numeric_limits<double>::quiet_NaN());
  }
  std::vector<std::uint8_t> covered(n_windows * n_series * n_dims, 0);

  for (const SubmissionForecast& rec : td.records) {
    if (static_cast<std::size_t>(rec.window_index) > n_windows) {
      throw Error(ErrorCode::kDataError,
                  "task '" + task.task_name + "': window_index " +
                      std::to_string(rec.window_index) + " outside 1.." +
                      std::to_string(n_windows) + " (submission line " +
                      std::to_string(rec.line_no) + ")");
    }
    auto sit = series_index.find(rec.item_id);
    if (sit == series_index.end()) {
      throw Error(ErrorCode::kDataError, "task '" + task.task_name + "': unknown item_id '" +
                                             rec.item_id + "' (submission line " +
                                             std::to_string(rec.line_no) + ")");
    }
    const std::size_t n = sit->second;
    if (rec.dim_index >= n_dims) {
      throw Error(ErrorCode::kShapeMismatch,
                  "task '" + task.task_name + "': dim_index " +
                      std::to_string(rec.dim_index) + " outside 0.." +
                      std::to_string(n_dims - 1) + " (submission line " +
                      std::to_string(rec.line_no) + ")");
    }
    if (rec.point.empty() == has_points) {
      throw Error(ErrorCode::kShapeMismatch,
                  "task '" + task.task_name +
                      "': records disagree on point forecast presence (submission line " +
                      std::to_string(rec.line_no) + ")");
    }
    std::vector<double> rec_levels;
    for (const auto& [q, values] : rec.quantiles) {
      (void)values;
      rec_levels.push_back(q);
    }
    if (rec_levels != levels) {
      throw Error(ErrorCode::kShapeMismatch,
                  "task '" + task.task_name +
                      "': records disagree on quantile levels (submission line " +
                      std::to_string(rec.line_no) + ")");
    }
    const std::size_t w = static_cast<std::size_t>(rec.window_index) - 1;
    std::uint8_t& seen = covered[(w * n_series + n) * n_dims + rec.dim_index];
    if (seen != 0) {
      throw Error(ErrorCode::kDataError,
                  "task '" + task.task_name + "': duplicate record for window " +
                      std::to_string(rec.window_index) + ", item '" + rec.item_id +
                      "', dim " + std::to_string(rec.dim_index) + " (submission line " +
                      std::to_string(rec.line_no) + ")");
    }
    seen = 1;
    ForecastSet& f = sets[w];
    if (has_points) {
      if (rec.point.size() != horizon) {
        throw Error(ErrorCode::kShapeMismatch,
                    "task '" + task.task_name + "': point array of length " +
                        std::to_string(rec.point.size()) + ", horizon is " +
                        std::to_string(horizon) + " (submission line " +
                        std::to_string(rec.line_no) + ")");
      }
      std::copy(rec.point.begin(), rec.point.end(), f.point(n, rec.dim_index));
    }
    for (std::size_t qi = 0; qi < rec.quantiles.size(); ++qi) {
      const std::vector<double>& values = rec.quantiles[qi].second;
      if (values.size() != horizon) {
        throw Error(ErrorCode::kShapeMismatch,
                    "task '" + task.task_name + "': quantile array of length " +
                        std::to_string(values.size()) + ", horizon is " +
                        std::to_string(horizon) + " (submission line " +
                        std::to_string(rec.line_no) + ")");
      }
      std::copy(values.begin(), values.end(), f.quantile(n, rec.dim_index, qi));
    }
  }

  for (std::size_t w = 0; w < n_windows; ++w) {
    for (std::size_t n = 0; n < n_series; ++n) {
      for (std::size_t d = 0; d < n_dims; ++d) {
        if (covered[(w * n_series + n) * n_dims + d] == 0) {
          throw Error(ErrorCode::kIncompleteSubmission,
                      "task '" + task.task_name + "': no forecast for window " +
                          std::to_string(w + 1) + ", item '" + run.ds.series[n].item_id +
                          "', dim " + std::to_string(d));
        }
      }
    }
  }

  std::vector<std::map<std::string, double>> window_scores;
  window_scores.reserve(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    WindowSlice slice = slice_window(run.ds, run.windows[w], task);
    window_scores.push_back(score_window(slice, sets[w], task));
  }
  const double runtime =
      td.runtime_s ? *td.runtime_s : std::numeric_limits<double>::quiet_NaN();
  return summarize(task, run.windows, window_scores, model_name, runtime,
                   td.leaked.value_or(false));
}

}  // namespace

int cmd_score(const ScoreOptions& opts) {
  const Benchmark bench = parse_benchmark(opts.benchmark_path);
  const ParsedSubmission sub = parse_submission(opts.submission_path);

  std::set<std::string> bench_tasks;
  for (const Task& task : bench.tasks) bench_tasks.insert(task.task_name);
  for (const auto& [name, task] : sub.tasks) {
    if (bench_tasks.find(name) == bench_tasks.end()) {
      throw Error(ErrorCode::kDataError,
                  "submission references unknown task '" + name + "'");
    }
  }

  std::vector<EvaluationSummary> out;
  out.reserve(bench.tasks.size());
  for (const Task& task : bench.tasks) {
    auto it = sub.tasks.find(task.task_name);
    if (it == sub.tasks.end()) {
      throw Error(ErrorCode::kIncompleteSubmission,
                  "no records for task '" + task.task_name + "' and no declared failure");
    }
    const SubmissionTask& td = it->second;
    if (td.declared_failed) {
      out.push_back(failed_summary(task, sub.model_name, td.failure_reason));
      std::cout << "task " << task.task_name << ": declared failed (" << td.failure_reason
                << ")\n";
      continue;
    }
    const TaskRun run = prepare_task(task);
    EvaluationSummary s = score_submission_task(run, td, sub.model_name);
    std::cout << "task " << task.task_name << ": " << s.eval_metric << "="
              << brief(s.task_metrics.at(s.eval_metric)) << " " << s.quantile_metric << "="
              << brief(s.task_metrics.at(s.quantile_metric));
    if (s.trained_on_this_dataset) std::cout << " [trained on this dataset]";
    std::cout << "\n";
    out.push_back(std::move(s));
  }
  write_summaries(out, opts.out_path);
  std::cout << "wrote " << opts.out_path << "\n";
  return 0;
}

namespace {

std::vector<fs::path> expand_globs(const std::vector<std::string>& patterns) {
  if (patterns.empty()) {
    throw Error(ErrorCode::kSchemaError, "no summaries files given");
  }
  std::vector<fs::path> files;
  std::set<std::string> seen;
  for (const std::string& pattern : patterns) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == GLOB_NOMATCH) {
      globfree(&g);
      throw Error(ErrorCode::kDataError, "no files match '" + pattern + "'");
    }
    if (rc != 0) {
      globfree(&g);
      throw Error(ErrorCode::kDataError, "cannot expand '" + pattern + "'");
    }
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      std::string path = g.gl_pathv[i];
      if (seen.insert(path).second) files.emplace_back(std::move(path));
    }
    globfree(&g);
  }
  return files;
}

struct LeaderboardReport {
  const LeaderboardOptions* opts = nullptr;
  const ErrorMatrix* e = nullptr;
  std::vector<MarginalRow> marginals;
  std::vector<double> pairwise_win;
  std::vector<double> pairwise_skill_m;
  IntervalMatrix win_ci;
  IntervalMatrix skill_ci;
  std::vector<double> avg_rank;
  std::optional<MarginalIntervals> marginal_win_ci;
  std::optional<MarginalIntervals> marginal_skill_ci;
  std::optional<BradleyTerryResult> bt;
  std::string bt_error;

  std::size_t model_index(const std::string& name) const {
    return static_cast<std::size_t>(
        std::lower_bound(e->model_names.begin(), e->model_names.end(), name) -
        e->model_names.begin());
  }
};

std::string metric_label(const LeaderboardOptions& opts) {
  return opts.metric.empty() ? "per-task eval metric" : opts.metric;
}

std::string render_markdown(const LeaderboardReport& rep) {
  const LeaderboardOptions& opts = *rep.opts;
  const ErrorMatrix& e = *rep.e;
  std::string md;
  md += "# Leaderboard\n\n";
  md += "- metric: " + metric_label(opts) + "\n";
  md += "- baseline: " + opts.baseline + "\n";
  md += "- leakage reference: " +
        (opts.leakage_reference.empty() ? opts.baseline + " (baseline)"
                                        : opts.leakage_reference) +
        "\n";
  md += "- tasks: " + std::to_string(e.num_tasks) +
        ", models: " + std::to_string(e.num_models) + "\n";
  md += "- bootstrap: B=" + std::to_string(opts.bootstrap_samples) +
        ", alpha=" + brief(opts.alpha) + ", seed=" + std::to_string(opts.seed) + "\n\n";

  const bool ci = rep.marginal_win_ci.has_value();
  md += "| Model | Avg win rate (%) | Skill score (%) | Median runtime (s) | Leakage (%) | "
        "Failures |\n";
  md += "|---|---:|---:|---:|---:|---:|\n";
  for (const MarginalRow& row : rep.marginals) {
    const std::size_t j = rep.model_index(row.model_name);
    std::string win = fixed(row.win_rate * 100.0, 1);
    std::string skill = fixed(row.skill * 100.0, 1);
    if (ci) {
      win += " [" + fixed(rep.marginal_win_ci->lower[j] * 100.0, 1) + ", " +
             fixed(rep.marginal_win_ci->upper[j] * 100.0, 1) + "]";
      skill += " [" + fixed(rep.marginal_skill_ci->lower[j] * 100.0, 1) + ", " +
               fixed(rep.marginal_skill_ci->upper[j] * 100.0, 1) + "]";
    }
    md += "| " + row.model_name + " | " + win + " | " + skill + " | " +
          (std::isnan(row.median_runtime_s) ? std::string("-")
                                            : fixed(round_runtime(row.median_runtime_s), 1)) +
          " | " + fixed(row.leakage_fraction * 100.0, 1) + " | " +
          std::to_string(row.failure_count) + " |\n";
  }

  auto pairwise_table = [&](const char* title, const std::vector<double>& values,
                            const IntervalMatrix& intervals) {
    md += "\n## ";
    md += title;
    md += "\n\n| Model |";
    for (const std::string& name : e.model_names) md += " " + name + " |";
    md += "\n|---|";
    for (std::size_t k = 0; k < e.num_models; ++k) md += "---|";
    md += "\n";
    for (std::size_t j = 0; j < e.num_models; ++j) {
      md += "| " + e.model_names[j] + " |";
      for (std::size_t k = 0; k < e.num_models; ++k) {
        if (j == k) {
          md += " - |";
        } else {
          md += " " + fixed(values[j * e.num_models + k], 3) + " [" +
                fixed(intervals.lo(j, k), 3) + ", " + fixed(intervals.hi(j, k), 3) + "] |";
        }
      }
      md += "\n";
    }
  };
  pairwise_table("Pairwise win rate (row beats column)", rep.pairwise_win, rep.win_ci);
  pairwise_table("Pairwise skill (row vs column)", rep.pairwise_skill_m, rep.skill_ci);

  md += "\n## Cross-checks\n\n| Model | Avg rank | Elo |\n|---|---:|---:|\n";
  for (const MarginalRow& row : rep.marginals) {
    const std::size_t j = rep.model_index(row.model_name);
    md += "| " + row.model_name + " | " + fixed(rep.avg_rank[j], 2) + " | " +
          (rep.bt ? fixed(rep.bt->theta[j], 1) : std::string("-")) + " |\n";
  }
  if (!rep.bt) {
    md += "\nBradley-Terry unavailable: " + rep.bt_error + "\n";
  }
  return md;
}

std::string csv_escape_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string render_csv(const LeaderboardReport& rep) {
  const bool ci = rep.marginal_win_ci.has_value();
  std::string csv = "model,avg_win_rate_percent,skill_score_percent";
  if (ci) {
    csv += ",win_rate_lo_percent,win_rate_hi_percent,skill_lo_percent,skill_hi_percent";
  }
  csv += ",median_runtime_s,leakage_percent,failures\n";
  for (const MarginalRow& row : rep.marginals) {
    const std::size_t j = rep.model_index(row.model_name);
    csv += csv_escape_cell(row.model_name);
    csv += "," + JsonWriter::number(row.win_rate * 100.0);
    csv += "," + JsonWriter::number(row.skill * 100.0);
    if (ci) {
      csv += "," + JsonWriter::number(rep.marginal_win_ci->lower[j] * 100.0);
      csv += "," + JsonWriter::number(rep.marginal_win_ci->upper[j] * 100.0);
      csv += "," + JsonWriter::number(rep.marginal_skill_ci->lower[j] * 100.0);
      csv += "," + JsonWriter::number(rep.marginal_skill_ci->upper[j] * 100.0);
    }
    csv += ",";
    if (!std::isnan(row.median_runtime_s)) csv += fixed(round_runtime(row.median_runtime_s), 1);
    csv += "," + JsonWriter::number(row.leakage_fraction * 100.0);
    csv += "," + std::to_string(row.failure_count);
    csv += "\n";
  }
  return csv;
}

std::string render_json(const LeaderboardReport& rep) {
  const LeaderboardOptions& opts = *rep.opts;
  const ErrorMatrix& e = *rep.e;
  JsonWriter w;
  w.begin_object();
  w.key("metric").value(metric_label(opts));
  w.key("baseline").value(opts.baseline);
  w.key("leakage_reference")
      .value(opts.leakage_reference.empty() ? opts.baseline : opts.leakage_reference);
  w.key("num_tasks").value(e.num_tasks);
  w.key("num_models").value(e.num_models);
  w.key("task_names").begin_array();
  for (const std::string& name : e.task_names) w.value(name);
  w.end_array();
  w.key("model_names").begin_array();
  for (const std::string& name : e.model_names) w.value(name);
  w.end_array();
  w.key("bootstrap").begin_object();
  w.key("samples").value(opts.bootstrap_samples);
  w.key("alpha").value(opts.alpha);
  w.key("seed").value(static_cast<std::int64_t>(opts.seed));
  w.end_object();

  w.key("models").begin_array();
  for (const MarginalRow& row : rep.marginals) {
    const std::size_t j = rep.model_index(row.model_name);
    w.begin_object();
    w.key("model_name").value(row.model_name);
    w.key("win_rate").value(row.win_rate);
    w.key("skill").value(row.skill);
    if (rep.marginal_win_ci) {
      w.key("win_rate_ci").begin_array();
      w.value(rep.marginal_win_ci->lower[j]).value(rep.marginal_win_ci->upper[j]);
      w.end_array();
      w.key("skill_ci").begin_array();
      w.value(rep.marginal_skill_ci->lower[j]).value(rep.marginal_skill_ci->upper[j]);
      w.end_array();
    }
    w.key("median_runtime_s").value(round_runtime(row.median_runtime_s));
    w.key("leakage_fraction").value(row.leakage_fraction);
    w.key("failure_count").value(row.failure_count);
    w.end_object();
  }
  w.end_array();

  auto matrix = [&](const char* key, const std::vector<double>& values,
                    const IntervalMatrix& intervals) {
    w.key(key).begin_object();
    auto rows = [&](const char* sub, const std::vector<double>& flat) {
      w.key(sub).begin_array();
      for (std::size_t j = 0; j < e.num_models; ++j) {
        w.begin_array();
        for (std::size_t k = 0; k < e.num_models; ++k) w.value(flat[j * e.num_models + k]);
        w.end_array();
      }
      w.end_array();
    };
    rows("values", values);
    rows("lower", intervals.lower);
    rows("upper", intervals.upper);
    w.end_object();
  };
  matrix("pairwise_win_rate", rep.pairwise_win, rep.win_ci);
  matrix("pairwise_skill", rep.pairwise_skill_m, rep.skill_ci);

  w.key("average_rank").begin_array();
  for (double v : rep.avg_rank) w.value(v);
  w.end_array();

  if (rep.bt) {
    w.key("bradley_terry").begin_object();
    w.key("theta").begin_array();
    for (double v : rep.bt->theta) w.value(v);
    w.end_array();
    w.key("iterations").value(rep.bt->iterations);
    w.key("gradient_norm").value(rep.bt->gradient_norm);
    w.end_object();
  } else {
    w.key("bradley_terry").null();
    w.key("bradley_terry_error").value(rep.bt_error);
  }

  w.key("imputations").begin_array();
  for (const ImputationRecord& rec : e.imputation_log) {
    w.begin_object();
    w.key("task_name").value(rec.task_name);
    w.key("model_name").value(rec.model_name);
    w.key("source_model").value(rec.source_model);
    w.key("reason").value(rec.reason);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  std::string out = w.take();
  out += '\n';
  return out;
}

}  // namespace

int cmd_leaderboard(const LeaderboardOptions& opts) {
  for (const std::string& f : opts.formats) {
    if (f != "md" && f != "csv" && f != "json") {
      throw Error(ErrorCode::kSchemaError, "unknown output format '" + f + "'");
    }
  }
  if (!opts.metric.empty() && !is_known_metric(opts.metric)) {
    throw Error(ErrorCode::kSchemaError, "unknown metric '" + opts.metric + "'");
  }

  std::vector<TaskScore> scores;
  for (const fs::path& file : expand_globs(opts.summaries)) {
    for (const EvaluationSummary& s : read_summaries(file)) {
      scores.push_back(to_task_score(s));
    }
  }
  const ErrorMatrix e =
      build_error_matrix(scores, opts.metric, opts.baseline, opts.leakage_reference);
  if (e.num_models < 2) {
    throw Error(ErrorCode::kDataError, "leaderboard needs at least two models, found " +
                                           std::to_string(e.num_models));
  }

  BootstrapConfig cfg;
  cfg.samples = opts.bootstrap_samples;
  cfg.alpha = opts.alpha;
  cfg.seed = opts.seed;
  cfg.jobs = opts.jobs;

  LeaderboardReport rep;
  rep.opts = &opts;
  rep.e = &e;
  rep.marginals = build_marginals(e);
  rep.pairwise_win = pairwise_win_rate(e);
  rep.pairwise_skill_m = pairwise_skill(e);
  rep.win_ci = bootstrap_intervals(e, PairwiseStatistic::kWinRate, cfg);
  rep.skill_ci = bootstrap_intervals(e, PairwiseStatistic::kSkill, cfg);
  rep.avg_rank = average_rank(e);
  if (opts.marginal_ci) {
    rep.marginal_win_ci = bootstrap_marginal_intervals(e, PairwiseStatistic::kWinRate, cfg);
    rep.marginal_skill_ci = bootstrap_marginal_intervals(e, PairwiseStatistic::kSkill, cfg);
  }
  try {
    rep.bt = bradley_terry(rep.pairwise_win, e.num_models, e.baseline_index);
  } catch (const Error& ex) {
    rep.bt_error = ex.what();
  }

  for (const ImputationRecord& rec : e.imputation_log) {
    std::cout << "imputed " << rec.task_name << "/" << rec.model_name << " from "
              << rec.source_model << " (" << rec.reason << ")\n";
  }
  for (std::size_t i = 0; i < rep.marginals.size(); ++i) {
    const MarginalRow& row = rep.marginals[i];
    std::cout << (i + 1) << ". " << row.model_name
              << "  win_rate=" << fixed(row.win_rate * 100.0, 1)
              << "%  skill=" << fixed(row.skill * 100.0, 1) << "%  failures=" << row.failure_count
              << "\n";
  }
  if (!rep.bt) {
    std::cout << "bradley-terry unavailable: " << rep.bt_error << "\n";
  }

  fs::create_directories(opts.out_dir);
  for (const std::string& format : opts.formats) {
    const fs::path path = fs::path(opts.out_dir) / ("leaderboard." + format);
    if (format == "md") {
      write_file_atomic(path, render_markdown(rep));
    } else if (format == "csv") {
      write_file_atomic(path, render_csv(rep));
    } else {
      write_file_atomic(path, render_json(rep));
    }
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

}  // namespace foreval
