#ifndef FOREVAL_METRICS_HPP
#define FOREVAL_METRICS_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "foreval/dataset.hpp"
#include "foreval/task.hpp"

namespace foreval {

// Forecasts of one model for one window, dense over (series, dim). Arrays
// are flat row-major: points[(n*D + d)*H + t], quantiles add a level axis
// between dim and step: quantiles[((n*D + d)*|Q| + i)*H + t].
struct ForecastSet {
  std::string model_name;
  std::size_t num_series = 0;
  std::size_t num_dims = 0;
  std::size_t horizon = 0;
  std::vector<double> quantile_levels;  // strictly increasing
  bool has_points = false;
  std::vector<double> points;     // N*D*H when has_points
  std::vector<double> quantiles;  // N*D*|Q|*H, empty when levels empty

  std::size_t cell_count() const { return num_series * num_dims * horizon; }

  double* point(std::size_t n, std::size_t d) {
    return points.data() + (n * num_dims + d) * horizon;
  }
  const double* point(std::size_t n, std::size_t d) const {
    return points.data() + (n * num_dims + d) * horizon;
  }
  double* quantile(std::size_t n, std::size_t d, std::size_t qi) {
    return quantiles.data() +
           ((n * num_dims + d) * quantile_levels.size() + qi) * horizon;
  }
  const double* quantile(std::size_t n, std::size_t d, std::size_t qi) const {
    return quantiles.data() +
           ((n * num_dims + d) * quantile_levels.size() + qi) * horizon;
  }
};

// Per-(series, dim) scale a_{n,d}: the mean absolute m-lag difference of the
// window's own past. zero marks cells whose scale is exactly 0.
struct ScaleVector {
  std::size_t num_series = 0;
  std::size_t num_dims = 0;
  int seasonality = 1;
  std::vector<double> a;     // N*D
  std::vector<bool> zero;    // N*D

  double at(std::size_t n, std::size_t d) const { return a[n * num_dims + d]; }
};

struct SeasonalErrorResult {
  double value = 0.0;
  bool zero_scale = false;  // value == 0, or no valid lag pairs at all
};

// Mean absolute m-lag difference over the history; pairs with a missing
// endpoint are skipped and the divisor is the count of valid pairs.
// Throws HistoryTooShort when T <= m.
SeasonalErrorResult seasonal_error(std::span<const double> history, int m);

ScaleVector compute_scales(const PredictionInput& input, int seasonality);

// Options shared by the scaled metrics. skip_zero_scale drops (n,d) cells
// with a_{n,d} = 0 from both numerator and divisor instead of failing.
struct MetricOptions {
  bool skip_zero_scale = false;
};

// Cells where the actual is NaN are skipped everywhere, and divisors count
// only scored cells. actuals/points are flat N*D*H arrays; quantiles is the
// ForecastSet layout.

double mase(std::span<const double> actuals, std::span<const double> points,
            const ScaleVector& scales, const MetricOptions& opts = {});

double quantile_loss(double y, double yhat, double q);

double sql(std::span<const double> actuals, std::span<const double> quantiles,
           std::span<const double> levels, const ScaleVector& scales,
           const MetricOptions& opts = {});

double wape(std::span<const double> actuals, std::span<const double> points);

double wql(std::span<const double> actuals, std::span<const double> quantiles,
           std::span<const double> levels, std::size_t num_series,
           std::size_t num_dims, std::size_t horizon);

// Sorts quantile predictions across levels at every (n, d, t) so they are
// non-decreasing in q.
void repair_quantile_crossing(ForecastSet& f);

// Scores one window: computes scales from the slice's past, repairs quantile
// crossing on a copy, and evaluates every configured metric. When the
// forecast has no point array the median quantile stands in (MissingQuantile
// if 0.5 is not a level).
std::map<std::string, double> score_window(const WindowSlice& slice,
                                           const ForecastSet& forecast,
                                           const Task& task,
                                           const MetricOptions& opts = {});

}  // namespace foreval

#endif  // FOREVAL_METRICS_HPP
