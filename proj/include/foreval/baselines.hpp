#ifndef FOREVAL_BASELINES_HPP
#define FOREVAL_BASELINES_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foreval/dataset.hpp"
#include "foreval/metrics.hpp"
#include "foreval/task.hpp"

namespace foreval {

enum class BaselineKind { kSeasonalNaive, kNaive, kDrift };

inline const std::vector<BaselineKind> kAllBaselines = {
    BaselineKind::kSeasonalNaive, BaselineKind::kNaive, BaselineKind::kDrift};

const char* baseline_name(BaselineKind kind);
std::optional<BaselineKind> baseline_from_name(const std::string& name);

// Single-series forecasters. history is one (series, dim) past; points gets
// H values, quantiles gets |levels| x H values (level-major, matching the
// ForecastSet cell layout). Missing history values are skipped: forecasts
// come from the observed values, residual pools from valid pairs only.
//
// Prediction bands are the textbook Gaussian forms: point + z_q * sigma *
// width(h), with sigma the RMS of in-sample residuals and width sqrt(k_h+1)
// (seasonal naive, k_h = floor((h-1)/m)), sqrt(h) (naive), or
// sqrt(h * (1 + h/(T-1))) (drift). The 0.5 level equals the point exactly.

void seasonal_naive_series(std::span<const double> history, int m, int horizon,
                           std::span<const double> levels, double* points, double* quantiles);

void naive_series(std::span<const double> history, int horizon,
                  std::span<const double> levels, double* points, double* quantiles);

void drift_series(std::span<const double> history, int horizon,
                  std::span<const double> levels, double* points, double* quantiles);

// Forecasts every (series, dim) of the window with one baseline. Seasonal
// naive uses the task's seasonality; quantile levels come from the task.
ForecastSet run_baseline(BaselineKind kind, const PredictionInput& input, const Task& task);

}  // namespace foreval

#endif  // FOREVAL_BASELINES_HPP
