#ifndef FOREVAL_COMMANDS_HPP
#define FOREVAL_COMMANDS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace foreval {

// Options mirror the CLI flags one-to-one; the cmd_* functions contain the
// full command logic so tests can drive them without spawning processes.
// Each returns a process exit status and reports progress on stdout;
// thrown Errors are the caller's to print.

struct ValidateOptions {
  std::string benchmark_path;
};

struct RunBaselinesOptions {
  std::string benchmark_path;
  std::string out_dir = ".";
  std::vector<std::string> baselines;  // empty = all built-in baselines
  // When set, also writes each baseline's raw forecasts to this directory
  // in the submission format, one JSONL file per baseline.
  std::string dump_forecasts_dir;
  int jobs = 1;
};

struct ScoreOptions {
  std::string benchmark_path;
  std::string submission_path;
  std::string out_path = "summaries.jsonl";
};

struct LeaderboardOptions {
  std::vector<std::string> summaries;  // files or glob patterns
  std::string out_dir = ".";
  std::vector<std::string> formats = {"md", "csv", "json"};
  std::string metric;  // empty = each task's designated eval metric
  std::string baseline = "seasonal_naive";
  std::string leakage_reference;  // empty = baseline
  int bootstrap_samples = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool marginal_ci = false;
  int jobs = 1;
};

int cmd_validate(const ValidateOptions& opts);
int cmd_run_baselines(const RunBaselinesOptions& opts);
int cmd_score(const ScoreOptions& opts);
int cmd_leaderboard(const LeaderboardOptions& opts);

}  // namespace foreval

#endif  // FOREVAL_COMMANDS_HPP
