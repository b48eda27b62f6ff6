#include "foreval/baselines.hpp"

#include <cmath>
#include <cstddef>

#include "foreval/errors.hpp"
#include "foreval/util/normal.hpp"

namespace foreval {

namespace {

std::ptrdiff_t last_valid(std::span<const double> v) {
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(v.size()) - 1; i >= 0; --i) {
    if (!std::isnan(v[static_cast<std::size_t>(i)])) return i;
  }
  return -1;
}

std::ptrdiff_t first_valid(std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isnan(v[i])) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

// RMS of y[t] - y[t-lag] - offset over pairs with both endpoints observed.
// Returns the number of contributing pairs through count.
double residual_rms(std::span<const double> y, std::size_t lag, double offset,
                    std::size_t& count) {
  double sum = 0.0;
  count = 0;
  for (std::size_t t = lag; t < y.size(); ++t) {
    if (std::isnan(y[t]) || std::isnan(y[t - lag])) continue;
    const double r = y[t] - y[t - lag] - offset;
    sum += r * r;
    ++count;
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

void fill_bands(const double* points, int horizon, std::span<const double> levels,
                double sigma, const std::vector<double>& width, double* quantiles) {
  for (std::size_t qi = 0; qi < levels.size(); ++qi) {
    const double z = inverse_normal_cdf(levels[qi]);
    double* row = quantiles + qi * static_cast<std::size_t>(horizon);
    for (int h = 0; h < horizon; ++h) {
      row[h] = points[h] + z * sigma * width[static_cast<std::size_t>(h)];
    }
  }
}

}  // namespace

const char* baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kSeasonalNaive: return "seasonal_naive";
    case BaselineKind::kNaive: return "naive";
    case BaselineKind::kDrift: return "drift";
  }
  return "?";
}

std::optional<BaselineKind> baseline_from_name(const std::string& name) {
  if (name == "seasonal_naive") return BaselineKind::kSeasonalNaive;
  if (name == "naive") return BaselineKind::kNaive;
  if (name == "drift") return BaselineKind::kDrift;
  return std::nullopt;
}

void seasonal_naive_series(std::span<const double> history, int m, int horizon,
                           std::span<const double> levels, double* points,
                           double* quantiles) {
  const std::size_t t = history.size();
  const std::size_t lag = static_cast<std::size_t>(m);
  if (t < lag) {
    throw Error(ErrorCode::kHistoryTooShort,
                "history length " + std::to_string(t) + " is below seasonality " +
                    std::to_string(m));
  }
  const std::ptrdiff_t last = last_valid(history);
  if (last < 0) {
    throw Error(ErrorCode::kHistoryTooShort, "history has no observed values");
  }

  for (int h = 1; h <= horizon; ++h) {
    // y_{T+h-m*ceil(h/m)}: the matching position of the last full season.
    std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(t) + h -
                         static_cast<std::ptrdiff_t>(lag) * ((h + m - 1) / m) - 1;
    while (idx >= 0 && std::isnan(history[static_cast<std::size_t>(idx)])) {
      idx -= static_cast<std::ptrdiff_t>(lag);
    }
    points[h - 1] = idx >= 0 ? history[static_cast<std::size_t>(idx)]
                             : history[static_cast<std::size_t>(last)];
  }

  std::size_t n_seasonal = 0;
  double sigma = residual_rms(history, lag, 0.0, n_seasonal);
  if (n_seasonal < 3) {
    std::size_t n_one = 0;
    sigma = residual_rms(history, 1, 0.0, n_one);
  }
  std::vector<double> width(static_cast<std::size_t>(horizon));
  for (int h = 1; h <= horizon; ++h) {
    const int k = (h - 1) / m;
    width[static_cast<std::size_t>(h - 1)] = std::sqrt(static_cast<double>(k + 1));
  }
  fill_bands(points, horizon, levels, sigma, width, quantiles);
}

void naive_series(std::span<const double> history, int horizon,
                  std::span<const double> levels, double* points, double* quantiles) {
  if (history.size() < 2) {
    throw Error(ErrorCode::kHistoryTooShort,
                "history length " + std::to_string(history.size()) + " is below 2");
  }
  const std::ptrdiff_t last = last_valid(history);
  if (last < 0) {
    throw Error(ErrorCode::kHistoryTooShort, "history has no observed values");
  }
  const double anchor = history[static_cast<std::size_t>(last)];
  for (int h = 0; h < horizon; ++h) points[h] = anchor;

  std::size_t n_one = 0;
  const double sigma = residual_rms(history, 1, 0.0, n_one);
  std::vector<double> width(static_cast<std::size_t>(horizon));
  for (int h = 1; h <= horizon; ++h) {
    width[static_cast<std::size_t>(h - 1)] = std::sqrt(static_cast<double>(h));
  }
  fill_bands(points, horizon, levels, sigma, width, quantiles);
}

void drift_series(std::span<const double> history, int horizon,
                  std::span<const double> levels, double* points, double* quantiles) {
  if (history.size() < 2) {
    throw Error(ErrorCode::kHistoryTooShort,
                "history length " + std::to_string(history.size()) + " is below 2");
  }
  const std::ptrdiff_t first = first_valid(history);
  const std::ptrdiff_t last = last_valid(history);
  if (first < 0 || last <= first) {
    throw Error(ErrorCode::kHistoryTooShort,
                "drift needs at least two observed values");
  }
  const double span_len = static_cast<double>(last - first);
  const double slope =
      (history[static_cast<std::size_t>(last)] - history[static_cast<std::size_t>(first)]) /
      span_len;
  const double anchor = history[static_cast<std::size_t>(last)];
  for (int h = 1; h <= horizon; ++h) {
    points[h - 1] = anchor + h * slope;
  }

  std::size_t n_one = 0;
  const double sigma = residual_rms(history, 1, slope, n_one);
  std::vector<double> width(static_cast<std::size_t>(horizon));
  for (int h = 1; h <= horizon; ++h) {
    const double hd = static_cast<double>(h);
    width[static_cast<std::size_t>(h - 1)] = std::sqrt(hd * (1.0 + hd / span_len));
  }
  fill_bands(points, horizon, levels, sigma, width, quantiles);
}

ForecastSet run_baseline(BaselineKind kind, const PredictionInput& input, const Task& task) {
  ForecastSet f;
  f.model_name = baseline_name(kind);
  f.num_series = input.num_series();
  f.num_dims = input.num_dims();
  f.horizon = static_cast<std::size_t>(task.horizon);
  f.quantile_levels = task.quantile_levels;
  f.has_points = true;
  f.points.resize(f.cell_count());
  f.quantiles.resize(f.cell_count() * f.quantile_levels.size());
  for (std::size_t n = 0; n < f.num_series; ++n) {
    for (std::size_t d = 0; d < f.num_dims; ++d) {
      std::span<const double> past = input.past_targets(n, d);
      double* points = f.point(n, d);
      double* quantiles = f.quantile(n, d, 0);
      try {
        switch (kind) {
          case BaselineKind::kSeasonalNaive:
            seasonal_naive_series(past, task.seasonality, task.horizon, f.quantile_levels,
                                  points, quantiles);
            break;
          case BaselineKind::kNaive:
            naive_series(past, task.horizon, f.quantile_levels, points, quantiles);
            break;
          case BaselineKind::kDrift:
            drift_series(past, task.horizon, f.quantile_levels, points, quantiles);
            break;
        }
      } catch (const Error& e) {
        throw Error(e.code(), std::string(baseline_name(kind)) + " on series '" +
                                  input.item_id(n) + "' dim " + std::to_string(d) + ": " +
                                  e.what());
      }
    }
  }
  return f;
}

}  // namespace foreval
