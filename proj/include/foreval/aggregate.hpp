#ifndef FOREVAL_AGGREGATE_HPP
#define FOREVAL_AGGREGATE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace foreval {

// One model's result on one task, distilled from an evaluation summary.
struct TaskScore {
  std::string task_name;
  std::string model_name;
  std::map<std::string, double> metrics;  // per-task means; empty when failed
  std::string eval_metric;                // the task's designated point metric
  std::string task_digest;                // serialized task definition, for cross-model checks
  double runtime_s = std::numeric_limits<double>::quiet_NaN();
  bool leaked = false;
  bool failed = false;
  std::string failure_reason;
};

struct ImputationRecord {
  std::string task_name;
  std::string model_name;
  std::string source_model;
  std::string reason;  // "failure" | "leakage"
};

// R tasks x M models of per-task scores, fully imputed: failed cells carry
// the baseline's score, leaked cells the reference model's. Rows and columns
// are sorted by name so identical inputs build identical matrices.
struct ErrorMatrix {
  std::size_t num_tasks = 0;
  std::size_t num_models = 0;
  std::vector<std::string> task_names;
  std::vector<std::string> model_names;
  std::size_t baseline_index = 0;
  std::vector<double> values;               // R*M row-major
  std::vector<std::uint8_t> failure_mask;   // R*M, pre-imputation flags
  std::vector<std::uint8_t> leakage_mask;   // R*M
  std::vector<double> runtimes;             // R*M, NaN when unreported
  std::vector<ImputationRecord> imputation_log;

  double at(std::size_t r, std::size_t j) const { return values[r * num_models + j]; }
};

// metric_name selects the scored metric column; empty means each task's own
// designated eval_metric. reference_model imputes leaked cells and defaults
// to the baseline.
ErrorMatrix build_error_matrix(const std::vector<TaskScore>& scores,
                               const std::string& metric_name,
                               const std::string& baseline_model,
                               const std::string& reference_model = "");

struct ClipBounds {
  double lower = 1e-2;
  double upper = 100.0;
};

// Average win rate per model: the fraction of (task, opponent) comparisons
// the model wins, ties counting half.
std::vector<double> average_win_rate(const ErrorMatrix& e);

// Skill per model against the baseline column: 1 minus the geometric mean
// of clipped error ratios. A 0/0 ratio counts as 1 (equal performance); a
// positive error against a zero baseline error is ZeroBaselineError.
std::vector<double> skill_scores(const ErrorMatrix& e, const ClipBounds& clip = {});

// M*M row-major matrices. Win rates: fraction of tasks where j beats k,
// ties half, diagonal 0.5, and W_kj = 1 - W_jk by construction. Skill:
// S_jk = 1 - geometric mean of clip(E_rj / E_rk), diagonal 0.
std::vector<double> pairwise_win_rate(const ErrorMatrix& e);
std::vector<double> pairwise_skill(const ErrorMatrix& e, const ClipBounds& clip = {});

// Midrank of each model per task (1 + losses + half the ties), averaged
// over tasks. Affine counterpart of average_win_rate.
std::vector<double> average_rank(const ErrorMatrix& e);

enum class PairwiseStatistic { kWinRate, kSkill };

struct BootstrapConfig {
  int samples = 1000;  // B
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct IntervalMatrix {
  std::size_t num_models = 0;
  std::vector<double> lower;  // M*M row-major
  std::vector<double> upper;

  double lo(std::size_t j, std::size_t k) const { return lower[j * num_models + k]; }
  double hi(std::size_t j, std::size_t k) const { return upper[j * num_models + k]; }
};

// Paired bootstrap over tasks: rows of E are resampled with replacement, the
// same rows for every model, B times; intervals are the empirical
// [alpha/2, 1-alpha/2] quantiles of the replicate statistics. Replicate b
// draws from its own counter-derived RNG substream, so results are
// bit-identical for a fixed seed regardless of thread count.
IntervalMatrix bootstrap_intervals(const ErrorMatrix& e, PairwiseStatistic stat,
                                   const BootstrapConfig& cfg, const ClipBounds& clip = {});

// Per-model intervals for the marginal statistics (average win rate, or
// skill against the baseline), using the same resamples as the pairwise
// bootstrap for a given seed.
struct MarginalIntervals {
  std::vector<double> lower;  // per model, model_names order
  std::vector<double> upper;
};

MarginalIntervals bootstrap_marginal_intervals(const ErrorMatrix& e, PairwiseStatistic stat,
                                               const BootstrapConfig& cfg,
                                               const ClipBounds& clip = {});

struct BradleyTerryOptions {
  double lambda = std::log(10.0) / 400.0;  // Elo scale
  double anchor_value = 1000.0;
  int max_iterations = 100000;
  double tolerance = 1e-10;  // gradient 2-norm
};

struct BradleyTerryResult {
  std::vector<double> theta;
  int iterations = 0;
  double gradient_norm = 0.0;
};

// Maximum-likelihood Bradley-Terry strengths from a pairwise win-rate
// matrix under the logistic link P(j beats k) = sigmoid(lambda*(theta_j -
// theta_k)), identified by pinning theta[anchor_index] to anchor_value.
// Solved by the minorize-maximize fixed point on the odds scale; throws
// NonConvergence (reporting the residual) if the gradient norm is still
// above tolerance after max_iterations, or on complete separation.
BradleyTerryResult bradley_terry(std::span<const double> pairwise_w, std::size_t num_models,
                                 std::size_t anchor_index,
                                 const BradleyTerryOptions& opts = {});

// Leaderboard row: per-model marginal statistics in output (win-rate) order.
struct MarginalRow {
  std::string model_name;
  double win_rate = 0.0;        // fraction, not percent
  double skill = 0.0;
  double median_runtime_s = std::numeric_limits<double>::quiet_NaN();
  double leakage_fraction = 0.0;
  std::size_t failure_count = 0;
};

// Rows sorted by win rate descending, model name ascending on ties.
std::vector<MarginalRow> build_marginals(const ErrorMatrix& e, const ClipBounds& clip = {});

}  // namespace foreval

#endif  // FOREVAL_AGGREGATE_HPP
