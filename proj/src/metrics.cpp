#include "foreval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "foreval/errors.hpp"
#include "foreval/kernels/kernels.hpp"

namespace foreval {

namespace {

std::string cell_name(std::size_t n, std::size_t d) {
  return "(series " + std::to_string(n) + ", dim " + std::to_string(d) + ")";
}

}  // namespace

SeasonalErrorResult seasonal_error(std::span<const double> history, int m) {
  const std::size_t t = history.size();
  const std::size_t lag = static_cast<std::size_t>(m);
  if (t <= lag) {
    throw Error(ErrorCode::kHistoryTooShort,
                "history length " + std::to_string(t) + " must exceed seasonality " +
                    std::to_string(m));
  }
  kernels::MaskedSum s =
      kernels::masked_sum_abs_diff(history.data() + lag, history.data(), t - lag);
  SeasonalErrorResult out;
  if (s.count == 0) {
    out.value = 0.0;
    out.zero_scale = true;
    return out;
  }
  out.value = s.sum / static_cast<double>(s.count);
  out.zero_scale = out.value == 0.0;
  return out;
}

ScaleVector compute_scales(const PredictionInput& input, int seasonality) {
  ScaleVector scales;
  scales.num_series = input.num_series();
  scales.num_dims = input.num_dims();
  scales.seasonality = seasonality;
  scales.a.reserve(scales.num_series * scales.num_dims);
  scales.zero.reserve(scales.num_series * scales.num_dims);
  for (std::size_t n = 0; n < scales.num_series; ++n) {
    for (std::size_t d = 0; d < scales.num_dims; ++d) {
      SeasonalErrorResult r;
      try {
        r = seasonal_error(input.past_targets(n, d), seasonality);
      } catch (const Error& e) {
        throw Error(e.code(), "series '" + input.item_id(n) + "' dim " + std::to_string(d) +
                                  ": " + e.what());
      }
      scales.a.push_back(r.value);
      scales.zero.push_back(r.zero_scale);
    }
  }
  return scales;
}

double mase(std::span<const double> actuals, std::span<const double> points,
            const ScaleVector& scales, const MetricOptions& opts) {
  const std::size_t cells = scales.num_series * scales.num_dims;
  const std::size_t h = cells == 0 ? 0 : actuals.size() / cells;
  if (actuals.size() != points.size() || actuals.size() != cells * h) {
    throw Error(ErrorCode::kShapeMismatch, "actuals and point forecasts disagree in shape");
  }
  double total = 0.0;
  std::int64_t scored = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    kernels::MaskedSum s =
        kernels::masked_sum_abs_diff(actuals.data() + c * h, points.data() + c * h, h);
    if (s.count == 0) continue;
    if (scales.zero[c]) {
      if (opts.skip_zero_scale) continue;
      throw Error(ErrorCode::kZeroScale,
                  "seasonal error is zero for " +
                      cell_name(c / scales.num_dims, c % scales.num_dims));
    }
    total += s.sum / scales.a[c];
    scored += s.count;
  }
  if (scored == 0) {
    throw Error(ErrorCode::kZeroDenominator, "no scored cells (all actuals missing)");
  }
  return total / static_cast<double>(scored);
}

double quantile_loss(double y, double yhat, double q) {
  if (y >= yhat) return 2.0 * q * (y - yhat);
  return 2.0 * (1.0 - q) * (yhat - y);
}

double sql(std::span<const double> actuals, std::span<const double> quantiles,
           std::span<const double> levels, const ScaleVector& scales,
           const MetricOptions& opts) {
  const std::size_t cells = scales.num_series * scales.num_dims;
  const std::size_t nq = levels.size();
  const std::size_t h = cells == 0 ? 0 : actuals.size() / cells;
  if (actuals.size() != cells * h || quantiles.size() != cells * nq * h) {
    throw Error(ErrorCode::kShapeMismatch, "actuals and quantile forecasts disagree in shape");
  }
  if (nq == 0) {
    throw Error(ErrorCode::kMissingQuantile, "no quantile levels to score");
  }
  double total = 0.0;
  std::int64_t scored = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double* y = actuals.data() + c * h;
    double cell_sum = 0.0;
    std::int64_t cell_count = 0;
    for (std::size_t qi = 0; qi < nq; ++qi) {
      kernels::MaskedSum s =
          kernels::masked_sum_pinball(y, quantiles.data() + (c * nq + qi) * h, h, levels[qi]);
      cell_sum += s.sum;
      cell_count = s.count;  // same mask for every level: actuals drive validity
    }
    if (cell_count == 0) continue;
    if (scales.zero[c]) {
      if (opts.skip_zero_scale) continue;
      throw Error(ErrorCode::kZeroScale,
                  "seasonal error is zero for " +
                      cell_name(c / scales.num_dims, c % scales.num_dims));
    }
    total += cell_sum / scales.a[c];
    scored += cell_count;
  }
  if (scored == 0) {
    throw Error(ErrorCode::kZeroDenominator, "no scored cells (all actuals missing)");
  }
  return total / static_cast<double>(scored);
}

double wape(std::span<const double> actuals, std::span<const double> points) {
  if (actuals.size() != points.size()) {
    throw Error(ErrorCode::kShapeMismatch, "actuals and point forecasts disagree in shape");
  }
  kernels::MaskedSum num = kernels::masked_sum_abs_diff(actuals.data(), points.data(),
                                                        actuals.size());
  kernels::MaskedSum den = kernels::masked_sum_abs(actuals.data(), actuals.size());
  if (den.count == 0 || den.sum == 0.0) {
    throw Error(ErrorCode::kZeroDenominator, "sum of absolute actuals is zero");
  }
  return num.sum / den.sum;
}

double wql(std::span<const double> actuals, std::span<const double> quantiles,
           std::span<const double> levels, std::size_t num_series, std::size_t num_dims,
           std::size_t horizon) {
  const std::size_t cells = num_series * num_dims;
  const std::size_t nq = levels.size();
  if (actuals.size() != cells * horizon || quantiles.size() != cells * nq * horizon) {
    throw Error(ErrorCode::kShapeMismatch, "actuals and quantile forecasts disagree in shape");
  }
  if (nq == 0) {
    throw Error(ErrorCode::kMissingQuantile, "no quantile levels to score");
  }
  double num = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t qi = 0; qi < nq; ++qi) {
      num += kernels::masked_sum_pinball(actuals.data() + c * horizon,
                                         quantiles.data() + (c * nq + qi) * horizon, horizon,
                                         levels[qi])
                 .sum;
    }
  }
  num /= static_cast<double>(nq);
  kernels::MaskedSum den = kernels::masked_sum_abs(actuals.data(), actuals.size());
  if (den.count == 0 || den.sum == 0.0) {
    throw Error(ErrorCode::kZeroDenominator, "sum of absolute actuals is zero");
  }
  return num / den.sum;
}

void repair_quantile_crossing(ForecastSet& f) {
  const std::size_t nq = f.quantile_levels.size();
  if (nq < 2) return;
  const std::size_t h = f.horizon;
  for (std::size_t n = 0; n < f.num_series; ++n) {
    for (std::size_t d = 0; d < f.num_dims; ++d) {
      double* base = f.quantile(n, d, 0);
      for (std::size_t t = 0; t < h; ++t) {
        // Insertion sort over the level axis (stride h); nq <= 9 in practice.
        for (std::size_t i = 1; i < nq; ++i) {
          double v = base[i * h + t];
          std::size_t j = i;
          while (j > 0 && base[(j - 1) * h + t] > v) {
            base[j * h + t] = base[(j - 1) * h + t];
            --j;
          }
          base[j * h + t] = v;
        }
      }
    }
  }
}

std::map<std::string, double> score_window(const WindowSlice& slice,
                                           const ForecastSet& forecast, const Task& task,
                                           const MetricOptions& opts) {
  const PredictionInput& input = slice.input();
  const std::size_t n_series = input.num_series();
  const std::size_t n_dims = input.num_dims();
  const std::size_t h = input.horizon();
  if (forecast.num_series != n_series || forecast.num_dims != n_dims ||
      forecast.horizon != h) {
    throw Error(ErrorCode::kShapeMismatch,
                "forecast shape (" + std::to_string(forecast.num_series) + "x" +
                    std::to_string(forecast.num_dims) + "x" + std::to_string(forecast.horizon) +
                    ") does not match task shape (" + std::to_string(n_series) + "x" +
                    std::to_string(n_dims) + "x" + std::to_string(h) + ")");
  }

  // Subset the forecast's levels to the task's grid.
  const std::size_t nq = task.quantile_levels.size();
  std::vector<std::size_t> level_index(nq);
  for (std::size_t qi = 0; qi < nq; ++qi) {
    auto it = std::find(forecast.quantile_levels.begin(), forecast.quantile_levels.end(),
                        task.quantile_levels[qi]);
    if (it == forecast.quantile_levels.end()) {
      throw Error(ErrorCode::kMissingQuantile,
                  "forecast lacks quantile level " + std::to_string(task.quantile_levels[qi]));
    }
    level_index[qi] = static_cast<std::size_t>(it - forecast.quantile_levels.begin());
  }

  ForecastSet scored;
  scored.model_name = forecast.model_name;
  scored.num_series = n_series;
  scored.num_dims = n_dims;
  scored.horizon = h;
  scored.quantile_levels = task.quantile_levels;
  scored.quantiles.resize(n_series * n_dims * nq * h);
  for (std::size_t n = 0; n < n_series; ++n) {
    for (std::size_t d = 0; d < n_dims; ++d) {
      for (std::size_t qi = 0; qi < nq; ++qi) {
        const double* src = forecast.quantile(n, d, level_index[qi]);
        std::copy(src, src + h, scored.quantile(n, d, qi));
      }
    }
  }
  repair_quantile_crossing(scored);

  scored.has_points = true;
  if (forecast.has_points) {
    scored.points = forecast.points;
  } else {
    auto median = std::find(task.quantile_levels.begin(), task.quantile_levels.end(), 0.5);
    if (median == task.quantile_levels.end()) {
      throw Error(ErrorCode::kMissingQuantile,
                  "forecast has no point array and no 0.5 quantile level");
    }
    const std::size_t mi = static_cast<std::size_t>(median - task.quantile_levels.begin());
    scored.points.resize(n_series * n_dims * h);
    for (std::size_t n = 0; n < n_series; ++n) {
      for (std::size_t d = 0; d < n_dims; ++d) {
        const double* src = scored.quantile(n, d, mi);
        std::copy(src, src + h, scored.point(n, d));
      }
    }
  }

  std::vector<double> actuals(n_series * n_dims * h);
  for (std::size_t n = 0; n < n_series; ++n) {
    for (std::size_t d = 0; d < n_dims; ++d) {
      std::span<const double> fut = slice.future_actuals(n, d);
      std::copy(fut.begin(), fut.end(), actuals.begin() + (n * n_dims + d) * h);
    }
  }

  ScaleVector scales = compute_scales(input, task.seasonality);
  if (!opts.skip_zero_scale) {
    for (std::size_t c = 0; c < scales.a.size(); ++c) {
      if (scales.zero[c]) {
        throw Error(ErrorCode::kZeroScale,
                    "task '" + task.task_name + "': seasonal error is zero for series '" +
                        input.item_id(c / n_dims) + "' dim " + std::to_string(c % n_dims) +
                        " at m=" + std::to_string(task.seasonality));
      }
    }
  }

  std::map<std::string, double> out;
  out["mase"] = mase(actuals, scored.points, scales, opts);
  out["sql"] = sql(actuals, scored.quantiles, scored.quantile_levels, scales, opts);
  out["wql"] = wql(actuals, scored.quantiles, scored.quantile_levels, n_series, n_dims, h);
  out["wape"] = wape(actuals, scored.points);
  return out;
}

}  // namespace foreval
