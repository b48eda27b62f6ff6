#ifndef FOREVAL_DATASET_HPP
#define FOREVAL_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "foreval/frequency.hpp"

namespace foreval {

struct Task;

// Description of one on-disk dataset: where the file lives, its format, and
// which columns play which role. Loaded from a YAML file whose keys match
// these field names.
struct DatasetManifest {
  std::string data_path;  // as written in the manifest; see resolve_data_path
  std::string format;     // "csv" | "jsonl"
  std::string id_column;
  std::string timestamp_column;
  std::string frequency;
  std::vector<std::string> target_columns;
  std::vector<std::string> past_dynamic_columns;
  std::vector<std::string> known_dynamic_columns;
  std::vector<std::string> static_columns;

  // Directory of the manifest (or benchmark) file, used to resolve a
  // relative data_path. Not part of the on-disk schema.
  std::string base_dir;
};

// Checks role invariants: non-empty targets, pairwise disjoint role lists,
// id/timestamp columns not reused, supported frequency and format.
void check_manifest(const DatasetManifest& m);

DatasetManifest parse_manifest(const std::filesystem::path& yaml_path);

// data_path resolution order: absolute as-is, else relative to base_dir,
// else relative to $FOREVAL_DATA_ROOT. First existing candidate wins; if
// none exists the base_dir candidate is returned so the open error names it.
std::filesystem::path resolve_data_path(const DatasetManifest& m);

// A static covariate cell. Text is kept verbatim; quoted distinguishes JSON
// strings from numbers so a write-back preserves the original type.
struct StaticValue {
  std::string text;
  bool quoted = true;

  bool operator==(const StaticValue&) const = default;
};

struct Series {
  std::string item_id;
  // Timeline rows, in time order. May extend past the targets when trailing
  // rows carry only known-dynamic covariates (every target cell missing).
  std::vector<std::string> timestamps;
  std::vector<std::int64_t> keys;  // spacing_key per timestamp
  std::size_t length = 0;          // T: rows up to the last observed target
  std::vector<std::vector<double>> targets;        // D arrays of length T
  std::vector<std::vector<double>> past_dynamic;   // per column, length T
  std::vector<std::vector<double>> known_dynamic;  // per column, timeline length
  std::vector<StaticValue> static_values;          // aligned with static_columns

  std::size_t timeline_length() const { return timestamps.size(); }
};

struct TimeSeriesDataset {
  DatasetManifest manifest;
  Frequency frequency;
  std::vector<Series> series;  // ordered by first appearance in the file

  std::size_t num_series() const { return series.size(); }
  std::size_t num_dims() const { return manifest.target_columns.size(); }
  std::size_t min_length() const;
};

// Missing numeric cells (empty CSV cell, JSONL null or absent key) load as
// NaN. Rows are grouped by id and sorted by timestamp; series keep the order
// in which their ids first appear.
TimeSeriesDataset load_dataset(const DatasetManifest& manifest);

void write_csv(const TimeSeriesDataset& ds, const std::filesystem::path& path);
void write_jsonl(const TimeSeriesDataset& ds, const std::filesystem::path& path);

// Read-only view of everything a forecaster may see for one window: per
// series the first `cutoff` observations, past covariates over the same
// range, known covariates through cutoff + horizon, and static values.
// Target indices past the cutoff are unreachable through this view.
class PredictionInput {
 public:
  PredictionInput(const TimeSeriesDataset& ds, std::size_t cutoff, std::size_t horizon)
      : ds_(&ds), cutoff_(cutoff), horizon_(horizon) {}

  std::size_t num_series() const { return ds_->num_series(); }
  std::size_t num_dims() const { return ds_->num_dims(); }
  std::size_t cutoff() const { return cutoff_; }
  std::size_t horizon() const { return horizon_; }

  const std::string& item_id(std::size_t n) const { return ds_->series[n].item_id; }

  std::span<const double> past_targets(std::size_t n, std::size_t d) const {
    return {ds_->series[n].targets[d].data(), cutoff_};
  }
  std::span<const double> past_dynamic(std::size_t n, std::size_t c) const {
    return {ds_->series[n].past_dynamic[c].data(), cutoff_};
  }
  // Known covariates for steps 1..cutoff+horizon (history and future).
  std::span<const double> known_dynamic(std::size_t n, std::size_t c) const {
    return {ds_->series[n].known_dynamic[c].data(), cutoff_ + horizon_};
  }
  const StaticValue& static_value(std::size_t n, std::size_t c) const {
    return ds_->series[n].static_values[c];
  }

 private:
  const TimeSeriesDataset* ds_;
  std::size_t cutoff_;
  std::size_t horizon_;
};

// One train-test split: the prediction input plus the held-out actuals.
// Scoring code reads future_actuals; forecasters only receive input().
class WindowSlice {
 public:
  WindowSlice(const TimeSeriesDataset& ds, std::size_t cutoff, std::size_t horizon)
      : ds_(&ds), input_(ds, cutoff, horizon) {}

  const PredictionInput& input() const { return input_; }

  std::span<const double> future_actuals(std::size_t n, std::size_t d) const {
    return {ds_->series[n].targets[d].data() + input_.cutoff(), input_.horizon()};
  }

 private:
  const TimeSeriesDataset* ds_;
  PredictionInput input_;
};

struct EvaluationWindow;

WindowSlice slice_window(const TimeSeriesDataset& ds, const EvaluationWindow& window,
                         const Task& task);

struct SeriesCheck {
  std::string item_id;
  std::size_t length = 0;
  bool sufficient_history = false;             // enough rows for the requested windows
  std::vector<std::size_t> nan_counts;         // per target dim
  std::vector<bool> zero_scale_risk;           // per target dim, a_{n,d} = 0
};

struct Defect {
  // Blocking defects make the task unrunnable (too little history for one
  // window, zero scale under the task's seasonality); the rest are
  // informational (missing values, trimmed window counts).
  bool blocking = false;
  std::string message;
};

struct ValidationReport {
  // Rows needed to run all requested windows: (W + 2) * H + 1.
  std::size_t required_length = 0;
  // Rows needed for a single window: 3H + 1.
  std::size_t minimum_length = 0;
  std::vector<SeriesCheck> series;
  std::vector<Defect> defects;

  bool ok() const {
    for (const Defect& d : defects) {
      if (d.blocking) return false;
    }
    return true;
  }
};

ValidationReport validate_dataset(const TimeSeriesDataset& ds, const Task& task);

}  // namespace foreval

#endif  // FOREVAL_DATASET_HPP
