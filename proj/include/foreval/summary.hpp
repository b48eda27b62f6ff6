#ifndef FOREVAL_SUMMARY_HPP
#define FOREVAL_SUMMARY_HPP

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "foreval/aggregate.hpp"
#include "foreval/task.hpp"

namespace foreval {

// One model's evaluation of one task: the resolved task definition echoed back,
// per-window metric values, and their per-task means. One summary is one
// line of a summaries JSONL file.
struct EvaluationSummary {
  std::string task_name;
  std::string model_name;
  // Spec echo: what was actually evaluated, with windows resolved.
  std::string dataset_path;
  std::string frequency;
  int horizon = 0;
  int num_windows = 0;                // windows actually run
  std::vector<std::int64_t> cutoffs;  // resolved tau_w, ascending
  int seasonality = 1;
  std::vector<double> quantile_levels;
  std::string eval_metric;
  std::string quantile_metric;
  // Results. Empty when failed.
  std::map<std::string, std::vector<double>> window_metrics;
  std::map<std::string, double> task_metrics;  // mean over windows
  double runtime_s = std::numeric_limits<double>::quiet_NaN();
  bool trained_on_this_dataset = false;
  bool failed = false;
  std::string failure_reason;
};

// Means per-window scores into a summary. window_scores[w] holds window
// w's metric values; every window must report the same metric set. Throws
// WindowCountMismatch when window_scores and windows disagree in size.
EvaluationSummary summarize(const Task& task, const std::vector<EvaluationWindow>& windows,
                            const std::vector<std::map<std::string, double>>& window_scores,
                            const std::string& model_name, double runtime_s,
                            bool trained_on_this_dataset);

EvaluationSummary failed_summary(const Task& task, const std::string& model_name,
                                 const std::string& reason);

// One-line JSON with a fixed key order and 17-significant-digit numbers, so
// equal summaries serialize to equal bytes. Failed summaries omit the
// metric objects.
std::string to_json_line(const EvaluationSummary& s);

EvaluationSummary summary_from_json(const std::string& line);

void write_summaries(const std::vector<EvaluationSummary>& summaries,
                     const std::filesystem::path& path);
std::vector<EvaluationSummary> read_summaries(const std::filesystem::path& path);

// Collapses a summary to its leaderboard row. The task digest is the
// serialized task definition; differing digests on one task mean the models
// were not evaluated on the same problem.
TaskScore to_task_score(const EvaluationSummary& s);

}  // namespace foreval

#endif  // FOREVAL_SUMMARY_HPP
