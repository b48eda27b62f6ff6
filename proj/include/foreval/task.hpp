#ifndef FOREVAL_TASK_HPP
#define FOREVAL_TASK_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "foreval/dataset.hpp"

namespace foreval {

inline const std::vector<std::string> kMetricNames = {"mase", "sql", "wql", "wape"};

bool is_known_metric(const std::string& name);

// A fully resolved forecasting problem: the dataset, the horizon, the
// rolling-window request, and the scoring configuration.
struct Task {
  std::string task_name;
  DatasetManifest dataset;
  int horizon = 0;       // H >= 1
  int num_windows = 1;   // W requested, >= 1
  // Optional explicit first cutoff: a row count, or a timestamp resolved
  // against the dataset (rows at or before it count as history).
  std::optional<std::int64_t> initial_cutoff_index;
  std::optional<std::string> initial_cutoff_timestamp;
  int seasonality = 1;   // m, defaulted from the dataset frequency
  std::vector<double> quantile_levels;  // strictly increasing, within (0,1)
  std::string eval_metric = "mase";     // primary point metric
  std::string quantile_metric = "sql";  // primary quantile metric
  // All metrics are always computed; the primary ones feed leaderboards.
  std::vector<std::string> metrics = kMetricNames;
};

struct EvaluationWindow {
  int index = 0;           // w, 1-based
  std::size_t cutoff = 0;  // tau_w: observations available as input
};

struct Benchmark {
  std::string name;
  std::vector<Task> tasks;
};

Benchmark parse_benchmark(const std::filesystem::path& yaml_path);

// Rolling windows over series of minimum length L. Without an explicit
// initial cutoff, W' = min(W, floor((L - (2H+1)) / H)) windows end at the
// series end: tau_w = L - (W'-w+1) * H. An explicit first cutoff pins tau_1
// and later cutoffs advance by H while tau_w + H <= L. Every cutoff must
// leave at least 2H+1 past observations.
std::vector<EvaluationWindow> generate_windows(const Task& task, std::size_t min_length);

// Resolves a timestamp-form initial cutoff to an observation count: the
// smallest per-series count of timeline rows at or before the cutoff.
// Index-form cutoffs pass through; returns nullopt when the task has none.
std::optional<std::int64_t> resolve_initial_cutoff(const Task& task,
                                                   const TimeSeriesDataset& ds);

// Task with the timestamp cutoff replaced by its resolved index.
Task with_resolved_cutoff(const Task& task, const TimeSeriesDataset& ds);

}  // namespace foreval

#endif  // FOREVAL_TASK_HPP
