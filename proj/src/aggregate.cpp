#include "foreval/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "foreval/errors.hpp"
#include "foreval/kernels/kernels.hpp"
#include "foreval/util/rng.hpp"

namespace foreval {

namespace {

// Error ratio with the degenerate-task convention: 0/0 compares equal.
double clipped_log_ratio(double num, double den, const ClipBounds& clip, ErrorCode on_zero,
                         const std::string& context) {
  double ratio;
  if (den == 0.0) {
    if (num == 0.0) {
      ratio = 1.0;
    } else {
      throw Error(on_zero, "zero denominator score with nonzero numerator on " + context);
    }
  } else {
    ratio = num / den;
  }
  return std::log(std::clamp(ratio, clip.lower, clip.upper));
}

// Percentile by linear interpolation on the order statistics (the common
// "type 7" rule): h = (B-1)p.
double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.size() == 1) return sorted[0];
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

ErrorMatrix build_error_matrix(const std::vector<TaskScore>& scores,
                               const std::string& metric_name,
                               const std::string& baseline_model,
                               const std::string& reference_model) {
  std::set<std::string> task_set;
  std::set<std::string> model_set;
  for (const TaskScore& s : scores) {
    task_set.insert(s.task_name);
    model_set.insert(s.model_name);
  }
  ErrorMatrix e;
  e.task_names.assign(task_set.begin(), task_set.end());
  e.model_names.assign(model_set.begin(), model_set.end());
  e.num_tasks = e.task_names.size();
  e.num_models = e.model_names.size();

  auto model_index = [&](const std::string& name) -> std::size_t {
    auto it = std::lower_bound(e.model_names.begin(), e.model_names.end(), name);
    if (it == e.model_names.end() || *it != name) {
      throw Error(ErrorCode::kMissingTaskScore, "model '" + name + "' has no results");
    }
    return static_cast<std::size_t>(it - e.model_names.begin());
  };
  e.baseline_index = model_index(baseline_model);
  const std::size_t reference_index =
      reference_model.empty() ? e.baseline_index : model_index(reference_model);

  const std::size_t r_count = e.num_tasks;
  const std::size_t m_count = e.num_models;
  std::vector<const TaskScore*> cells(r_count * m_count, nullptr);
  for (const TaskScore& s : scores) {
    const std::size_t r = static_cast<std::size_t>(
        std::lower_bound(e.task_names.begin(), e.task_names.end(), s.task_name) -
        e.task_names.begin());
    const std::size_t j = model_index(s.model_name);
    if (cells[r * m_count + j] != nullptr) {
      throw Error(ErrorCode::kDataError, "duplicate summary for model '" + s.model_name +
                                             "' on task '" + s.task_name + "'");
    }
    cells[r * m_count + j] = &s;
  }

  e.values.assign(r_count * m_count, 0.0);
  e.failure_mask.assign(r_count * m_count, 0);
  e.leakage_mask.assign(r_count * m_count, 0);
  e.runtimes.assign(r_count * m_count, std::numeric_limits<double>::quiet_NaN());

  for (std::size_t r = 0; r < r_count; ++r) {
    // Every model on every task, and one consistent task definition across models.
    const std::string* digest = nullptr;
    for (std::size_t j = 0; j < m_count; ++j) {
      const TaskScore* s = cells[r * m_count + j];
      if (s == nullptr) {
        throw Error(ErrorCode::kMissingTaskScore,
                    "model '" + e.model_names[j] + "' has no result for task '" +
                        e.task_names[r] + "' and no declared failure");
      }
      if (!s->failed && !s->task_digest.empty()) {
        if (digest == nullptr) {
          digest = &s->task_digest;
        } else if (*digest != s->task_digest) {
          throw Error(ErrorCode::kDataError,
                      "task '" + e.task_names[r] +
                          "': models were evaluated with different task specifications");
        }
      }
      e.failure_mask[r * m_count + j] = s->failed ? 1 : 0;
      e.leakage_mask[r * m_count + j] = s->leaked ? 1 : 0;
      e.runtimes[r * m_count + j] = s->runtime_s;
    }

    const TaskScore* base = cells[r * m_count + e.baseline_index];
    if (base->failed || base->leaked) {
      throw Error(ErrorCode::kBaselineIncomplete,
                  "baseline '" + baseline_model + "' " +
                      (base->failed ? "failed" : "is flagged as leaked") + " on task '" +
                      e.task_names[r] + "'");
    }

    auto metric_of = [&](const TaskScore* s) {
      const std::string& name = metric_name.empty() ? s->eval_metric : metric_name;
      auto it = s->metrics.find(name);
      if (it == s->metrics.end()) {
        throw Error(ErrorCode::kMissingTaskScore,
                    "model '" + s->model_name + "' reports no metric '" + name +
                        "' for task '" + s->task_name + "'");
      }
      if (!(it->second >= 0.0) || std::isinf(it->second)) {
        throw Error(ErrorCode::kDataError, "metric '" + name + "' of model '" + s->model_name +
                                               "' on task '" + s->task_name +
                                               "' is not a finite non-negative number");
      }
      return it->second;
    };

    const double baseline_value = metric_of(base);

    // Failures first: failed cells take the baseline's score.
    for (std::size_t j = 0; j < m_count; ++j) {
      const TaskScore* s = cells[r * m_count + j];
      if (s->failed) {
        e.values[r * m_count + j] = baseline_value;
        e.imputation_log.push_back(
            {e.task_names[r], e.model_names[j], baseline_model, "failure"});
      } else {
        e.values[r * m_count + j] = metric_of(s);
      }
    }
    // Then leakage: leaked cells take the reference model's (already
    // failure-imputed) score; if the reference itself leaked on this task,
    // the baseline stands in.
    const bool reference_leaked = cells[r * m_count + reference_index]->leaked;
    const std::size_t source =
        reference_leaked ? e.baseline_index : reference_index;
    for (std::size_t j = 0; j < m_count; ++j) {
      if (!cells[r * m_count + j]->leaked) continue;
      e.values[r * m_count + j] = e.values[r * m_count + source];
      e.imputation_log.push_back(
          {e.task_names[r], e.model_names[j], e.model_names[source], "leakage"});
    }
  }
  return e;
}

std::vector<double> average_win_rate(const ErrorMatrix& e) {
  const std::size_t r_count = e.num_tasks;
  const std::size_t m_count = e.num_models;
  if (m_count < 2) {
    throw Error(ErrorCode::kDataError, "win rates need at least two models");
  }
  std::vector<double> wins(m_count, 0.0);  // exact multiples of 0.5
  for (std::size_t r = 0; r < r_count; ++r) {
    const double* row = e.values.data() + r * m_count;
    for (std::size_t j = 0; j < m_count; ++j) {
      for (std::size_t k = 0; k < m_count; ++k) {
        if (k == j) continue;
        if (row[j] < row[k]) {
          wins[j] += 1.0;
        } else if (row[j] == row[k]) {
          wins[j] += 0.5;
        }
      }
    }
  }
  const double denom = static_cast<double>(r_count) * static_cast<double>(m_count - 1);
  for (double& w : wins) w /= denom;
  return wins;
}

std::vector<double> skill_scores(const ErrorMatrix& e, const ClipBounds& clip) {
  const std::size_t r_count = e.num_tasks;
  const std::size_t m_count = e.num_models;
  std::vector<double> skill(m_count, 0.0);
  for (std::size_t j = 0; j < m_count; ++j) {
    double log_sum = 0.0;
    for (std::size_t r = 0; r < r_count; ++r) {
      log_sum += clipped_log_ratio(e.at(r, j), e.at(r, e.baseline_index), clip,
                                   ErrorCode::kZeroBaseline, "task '" + e.task_names[r] + "'");
    }
    skill[j] = 1.0 - std::exp(log_sum / static_cast<double>(r_count));
  }
  return skill;
}

std::vector<double> pairwise_win_rate(const ErrorMatrix& e) {
  const std::size_t r_count = e.num_tasks;
  const std::size_t m_count = e.num_models;
  if (m_count < 2) {
    throw Error(ErrorCode::kDataError, "win rates need at least two models");
  }
  std::vector<double> w(m_count * m_count, 0.5);
  for (std::size_t j = 0; j < m_count; ++j) {
    for (std::size_t k = j + 1; k < m_count; ++k) {
      double wins = 0.0;
      for (std::size_t r = 0; r < r_count; ++r) {
        const double a = e.at(r, j);
        const double b = e.at(r, k);
        if (a < b) {
          wins += 1.0;
        } else if (a == b) {
          wins += 0.5;
        }
      }
      const double w_jk = wins / static_cast<double>(r_count);
      w[j * m_count + k] = w_jk;
      w[k * m_count + j] = 1.0 - w_jk;
    }
  }
  return w;
}

std::vector<double> pairwise_skill(const ErrorMatrix& e, const ClipBounds& clip) {
  const std::size_t r_count = e.num_tasks;
  const std::size_t m_count = e.num_models;
  std::vector<double> s(m_count * m_count, 0.0);
  for (std::size_t j = 0; j < m_count; ++j) {
    for (std::size_t k = 0; k < m_count; ++k) {
      if (k == j) continue;
      double log_sum = 0.0;
      for (std::size_t r = 0; r < r_count; ++r) {
        log_sum += clipped_log_ratio(e.at(r, j), e.at(r, k), clip, ErrorCode::kZeroReference,
                                     "task '" + e.task_names[r] + "'");
      }
      s[j * m_count + k] = 1.0 - std::exp(log_sum / static_cast<double>(r_count));
    }
  }
  return s;
}

std::vector<double> average_rank(const ErrorMatrix& e) {
  const std::size_t r_count = e.num_tasks;
  const std::size_t m_count = e.num_models;
  std::vector<double> rank_sum(m_count, 0.0);
  for (std::size_t r = 0; r < r_count; ++r) {
    const double* row = e.values.data() + r * m_count;
    for (std::size_t j = 0; j < m_count; ++j) {
      double rank = 1.0;
      for (std::size_t k = 0; k < m_count; ++k) {
        if (k == j) continue;
        if (row[k] < row[j]) {
          rank += 1.0;
        } else if (row[k] == row[j]) {
          rank += 0.5;
        }
      }
      rank_sum[j] += rank;
    }
  }
  for (double& v : rank_sum) v /= static_cast<double>(r_count);
  return rank_sum;
}

namespace {

// Replicate core shared by the pairwise and marginal bootstraps. rows holds
// one width-sized statistic precursor per task; replicate b sums the rows
// its substream samples and finalizes the sums to statistics (mean for win
// rates, 1 - exp(mean) for skill).
std::vector<double> bootstrap_replicates(const std::vector<double>& rows, std::size_t r_count,
                                         std::size_t width, PairwiseStatistic stat,
                                         const BootstrapConfig& cfg) {
  if (cfg.samples < 1 || !(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw Error(ErrorCode::kSchemaError, "bootstrap needs samples >= 1 and alpha in (0,1)");
  }
  const std::size_t b_count = static_cast<std::size_t>(cfg.samples);
  std::vector<double> replicates(b_count * width);
  auto run_replicate = [&](std::size_t b) {
    SplitMix64 rng(substream_seed(cfg.seed, b));
    std::vector<std::uint32_t> idx(r_count);
    for (std::size_t i = 0; i < r_count; ++i) {
      idx[i] = static_cast<std::uint32_t>(rng.bounded(r_count));
    }
    double* acc = replicates.data() + b * width;
    std::fill(acc, acc + width, 0.0);
    kernels::accumulate_rows(acc, rows.data(), width, idx.data(), r_count);
    const double inv_r = 1.0 / static_cast<double>(r_count);
    if (stat == PairwiseStatistic::kWinRate) {
      for (std::size_t i = 0; i < width; ++i) acc[i] *= inv_r;
    } else {
      for (std::size_t i = 0; i < width; ++i) acc[i] = 1.0 - std::exp(acc[i] * inv_r);
    }
  };

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1 || b_count < 2) {
    for (std::size_t b = 0; b < b_count; ++b) run_replicate(b);
  } else {
    std::vector<std::thread> workers;
    const std::size_t per = (b_count + static_cast<std::size_t>(jobs) - 1) /
                            static_cast<std::size_t>(jobs);
    for (int t = 0; t < jobs; ++t) {
      const std::size_t lo = static_cast<std::size_t>(t) * per;
      const std::size_t hi = std::min(lo + per, b_count);
      if (lo >= hi) break;
      workers.emplace_back([&, lo, hi] {
        for (std::size_t b = lo; b < hi; ++b) run_replicate(b);
      });
    }
    for (auto& w : workers) w.join();
  }
  return replicates;
}

void collect_intervals(const std::vector<double>& replicates, std::size_t width, double alpha,
                       std::vector<double>& lower, std::vector<double>& upper) {
  const std::size_t b_count = replicates.size() / width;
  lower.resize(width);
  upper.resize(width);
  std::vector<double> samples(b_count);
  for (std::size_t i = 0; i < width; ++i) {
    for (std::size_t b = 0; b < b_count; ++b) samples[b] = replicates[b * width + i];
    std::sort(samples.begin(), samples.end());
    lower[i] = percentile(samples, alpha / 2.0);
    upper[i] = percentile(samples, 1.0 - alpha / 2.0);
  }
}

}  // namespace

IntervalMatrix bootstrap_intervals(const ErrorMatrix& e, PairwiseStatistic stat,
                                   const BootstrapConfig& cfg, const ClipBounds& clip) {
  const std::size_t r_count = e.num_tasks;
  const std::size_t m_count = e.num_models;
  const std::size_t width = m_count * m_count;

  // Per-task contribution of every ordered pair, so a replicate reduces to
  // one row-sum pass: win indicators for win rates, clipped log ratios for
  // skill. Diagonals hold the fixed values' precursors (0.5 wins, log 1).
  std::vector<double> rows(r_count * width);
  for (std::size_t r = 0; r < r_count; ++r) {
    const double* row = e.values.data() + r * m_count;
    double* out = rows.data() + r * width;
    for (std::size_t j = 0; j < m_count; ++j) {
      for (std::size_t k = 0; k < m_count; ++k) {
        double v;
        if (stat == PairwiseStatistic::kWinRate) {
          if (j == k) {
            v = 0.5;
          } else if (row[j] < row[k]) {
            v = 1.0;
          } else if (row[j] == row[k]) {
            v = 0.5;
          } else {
            v = 0.0;
          }
        } else {
          v = j == k ? 0.0
                     : clipped_log_ratio(row[j], row[k], clip, ErrorCode::kZeroReference,
                                         "task '" + e.task_names[r] + "'");
        }
        out[j * m_count + k] = v;
      }
    }
  }

  const std::vector<double> replicates =
      bootstrap_replicates(rows, r_count, width, stat, cfg);
  IntervalMatrix out;
  out.num_models = m_count;
  collect_intervals(replicates, width, cfg.alpha, out.lower, out.upper);
  return out;
}

MarginalIntervals bootstrap_marginal_intervals(const ErrorMatrix& e, PairwiseStatistic stat,
                                               const BootstrapConfig& cfg,
                                               const ClipBounds& clip) {
  const std::size_t r_count = e.num_tasks;
  const std::size_t m_count = e.num_models;
  if (stat == PairwiseStatistic::kWinRate && m_count < 2) {
    throw Error(ErrorCode::kDataError, "win rates need at least two models");
  }

  // Win rate: per-task share of opponents beaten. Skill: clipped log ratio
  // against the baseline column.
  std::vector<double> rows(r_count * m_count);
  for (std::size_t r = 0; r < r_count; ++r) {
    const double* row = e.values.data() + r * m_count;
    double* out = rows.data() + r * m_count;
    for (std::size_t j = 0; j < m_count; ++j) {
      if (stat == PairwiseStatistic::kWinRate) {
        double wins = 0.0;
        for (std::size_t k = 0; k < m_count; ++k) {
          if (k == j) continue;
          if (row[j] < row[k]) {
            wins += 1.0;
          } else if (row[j] == row[k]) {
            wins += 0.5;
          }
        }
        out[j] = wins / static_cast<double>(m_count - 1);
      } else {
        out[j] = clipped_log_ratio(row[j], row[e.baseline_index], clip,
                                   ErrorCode::kZeroBaseline,
                                   "task '" + e.task_names[r] + "'");
      }
    }
  }

  const std::vector<double> replicates =
      bootstrap_replicates(rows, r_count, m_count, stat, cfg);
  MarginalIntervals out;
  collect_intervals(replicates, m_count, cfg.alpha, out.lower, out.upper);
  return out;
}

BradleyTerryResult bradley_terry(std::span<const double> pairwise_w, std::size_t num_models,
                                 std::size_t anchor_index, const BradleyTerryOptions& opts) {
  const std::size_t m_count = num_models;
  if (pairwise_w.size() != m_count * m_count || m_count < 2) {
    throw Error(ErrorCode::kShapeMismatch, "pairwise matrix must be MxM with M >= 2");
  }
  if (anchor_index >= m_count) {
    throw Error(ErrorCode::kSchemaError, "anchor index out of range");
  }

  // Total observed win mass per model; a model winning or losing everything
  // pushes the MLE to the boundary.
  std::vector<double> win_mass(m_count, 0.0);
  for (std::size_t j = 0; j < m_count; ++j) {
    for (std::size_t k = 0; k < m_count; ++k) {
      if (k != j) win_mass[j] += pairwise_w[j * m_count + k];
    }
    if (win_mass[j] == 0.0 || win_mass[j] == static_cast<double>(m_count - 1)) {
      throw Error(ErrorCode::kNonConvergence,
                  "no finite maximum: model " + std::to_string(j) +
                      " wins every comparison or none");
    }
  }

  std::vector<double> gamma(m_count, 1.0);
  std::vector<double> next(m_count, 0.0);
  auto gradient_norm = [&] {
    double sq = 0.0;
    for (std::size_t j = 0; j < m_count; ++j) {
      double g = 0.0;
      for (std::size_t k = 0; k < m_count; ++k) {
        if (k == j) continue;
        g += pairwise_w[j * m_count + k] - gamma[j] / (gamma[j] + gamma[k]);
      }
      g *= opts.lambda;
      sq += g * g;
    }
    return std::sqrt(sq);
  };

  BradleyTerryResult result;
  double norm = gradient_norm();
  int it = 0;
  while (norm > opts.tolerance && it < opts.max_iterations) {
    for (std::size_t j = 0; j < m_count; ++j) {
      double denom = 0.0;
      for (std::size_t k = 0; k < m_count; ++k) {
        if (k != j) denom += 1.0 / (gamma[j] + gamma[k]);
      }
      next[j] = win_mass[j] / denom;
    }
    const double scale = 1.0 / next[anchor_index];
    for (std::size_t j = 0; j < m_count; ++j) gamma[j] = next[j] * scale;
    ++it;
    norm = gradient_norm();
  }
  result.iterations = it;
  result.gradient_norm = norm;
  if (norm > opts.tolerance) {
    throw Error(ErrorCode::kNonConvergence,
                "gradient norm " + std::to_string(norm) + " still above tolerance after " +
                    std::to_string(it) + " iterations");
  }
  result.theta.resize(m_count);
  for (std::size_t j = 0; j < m_count; ++j) {
    result.theta[j] =
        opts.anchor_value + (std::log(gamma[j]) - std::log(gamma[anchor_index])) / opts.lambda;
  }
  return result;
}

std::vector<MarginalRow> build_marginals(const ErrorMatrix& e, const ClipBounds& clip) {
  const std::vector<double> win = average_win_rate(e);
  const std::vector<double> skill = skill_scores(e, clip);
  std::vector<MarginalRow> rows(e.num_models);
  for (std::size_t j = 0; j < e.num_models; ++j) {
    MarginalRow& row = rows[j];
    row.model_name = e.model_names[j];
    row.win_rate = win[j];
    row.skill = skill[j];
    std::vector<double> rt;
    std::size_t leaks = 0;
    std::size_t failures = 0;
    for (std::size_t r = 0; r < e.num_tasks; ++r) {
      const double v = e.runtimes[r * e.num_models + j];
      if (!std::isnan(v)) rt.push_back(v);
      leaks += e.leakage_mask[r * e.num_models + j];
      failures += e.failure_mask[r * e.num_models + j];
    }
    if (!rt.empty()) {
      std::sort(rt.begin(), rt.end());
      const std::size_t mid = rt.size() / 2;
      row.median_runtime_s =
          rt.size() % 2 == 1 ? rt[mid] : 0.5 * (rt[mid - 1] + rt[mid]);
    }
    row.leakage_fraction =
        e.num_tasks == 0 ? 0.0 : static_cast<double>(leaks) / static_cast<double>(e.num_tasks);
    row.failure_count = failures;
  }
  std::sort(rows.begin(), rows.end(), [](const MarginalRow& a, const MarginalRow& b) {
    if (a.win_rate != b.win_rate) return a.win_rate > b.win_rate;
    return a.model_name < b.model_name;
  });
  return rows;
}

}  // namespace foreval
