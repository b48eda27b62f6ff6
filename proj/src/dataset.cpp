#include "foreval/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "foreval/errors.hpp"
#include "foreval/metrics.hpp"
#include "foreval/task.hpp"
#include "foreval/util/io.hpp"
#include "foreval/util/json_writer.hpp"
#include "yaml_detail.hpp"

namespace foreval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_number(const std::string& text, const std::string& context) {
  std::string t = trim(text);
  if (t.empty()) return kNaN;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) {
    throw Error(ErrorCode::kDataError, "non-numeric value '" + text + "' in " + context);
  }
  if (std::isinf(v)) {
    throw Error(ErrorCode::kDataError, "non-finite value '" + text + "' in " + context);
  }
  return v;
}

// One raw file row before grouping: the id, the timestamp text, and the
// declared numeric/static cells in manifest order.
struct RawRow {
  std::string id;
  std::string timestamp;
  std::int64_t key = 0;
  std::vector<double> numeric;       // targets, past, known (concatenated)
  std::vector<StaticValue> statics;  // aligned with static_columns
  std::vector<bool> static_present;
};

// RFC-4180 style: quoted fields may contain commas, doubled quotes, and
// newlines. Returns one vector of cells per record.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(row));
    row.clear();
  };
  while (i < n) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          i += 2;
        } else {
          in_quotes = false;
          ++i;
        }
      } else {
        field += c;
        ++i;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
        } else {
          field += c;
        }
        field_started = true;
        ++i;
        break;
      case ',':
        end_field();
        ++i;
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') ++i;
        end_record();
        ++i;
        break;
      case '\n':
        end_record();
        ++i;
        break;
      default:
        field += c;
        field_started = true;
        ++i;
    }
  }
  if (field_started || !field.empty() || !row.empty()) end_record();
  return records;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += '"';
  return out;
}

std::string number_cell(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<RawRow> read_csv_rows(const DatasetManifest& m, const std::filesystem::path& path,
                                  const std::vector<std::string>& numeric_columns) {
  auto records = parse_csv(read_file(path));
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no header row in " + path.string());
  }
  const std::vector<std::string>& header = records.front();
  std::map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;

  auto require = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it == col_index.end()) {
      throw Error(ErrorCode::kMissingColumn,
                  "column '" + name + "' not found in " + path.string());
    }
    return it->second;
  };
  const std::size_t id_idx = require(m.id_column);
  const std::size_t ts_idx = require(m.timestamp_column);
  std::vector<std::size_t> numeric_idx;
  for (const std::string& c : numeric_columns) numeric_idx.push_back(require(c));
  std::vector<std::size_t> static_idx;
  for (const std::string& c : m.static_columns) static_idx.push_back(require(c));

  std::vector<RawRow> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;  // stray blank line
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::kDataError,
                  "row " + std::to_string(r + 1) + " of " + path.string() + " has " +
                      std::to_string(rec.size()) + " cells, header has " +
                      std::to_string(header.size()));
    }
    RawRow row;
    row.id = rec[id_idx];
    row.timestamp = rec[ts_idx];
    row.numeric.reserve(numeric_idx.size());
    for (std::size_t i = 0; i < numeric_idx.size(); ++i) {
      row.numeric.push_back(parse_number(
          rec[numeric_idx[i]],
          "column '" + numeric_columns[i] + "', row " + std::to_string(r + 1)));
    }
    for (std::size_t s : static_idx) {
      row.statics.push_back({rec[s], true});
      row.static_present.push_back(true);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RawRow> read_jsonl_rows(const DatasetManifest& m, const std::filesystem::path& path,
                                    const std::vector<std::string>& numeric_columns) {
  using nlohmann::json;
  std::vector<std::string> lines = split_lines(read_file(path));
  std::vector<RawRow> rows;
  std::vector<bool> column_seen(numeric_columns.size(), false);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    json j;
    try {
      j = json::parse(lines[li]);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kDataError,
                  "line " + std::to_string(li + 1) + " of " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) {
      throw Error(ErrorCode::kDataError,
                  "line " + std::to_string(li + 1) + " of " + path.string() + " is not an object");
    }
    RawRow row;
    auto id_it = j.find(m.id_column);
    auto ts_it = j.find(m.timestamp_column);
    if (id_it == j.end() || ts_it == j.end()) {
      throw Error(ErrorCode::kMissingColumn,
                  "record on line " + std::to_string(li + 1) + " of " + path.string() +
                      " lacks '" + (id_it == j.end() ? m.id_column : m.timestamp_column) + "'");
    }
    if (id_it->is_string()) {
      row.id = id_it->get<std::string>();
    } else if (id_it->is_number_integer()) {
      row.id = std::to_string(id_it->get<std::int64_t>());
    } else {
      throw Error(ErrorCode::kDataError,
                  "id on line " + std::to_string(li + 1) + " must be a string or integer");
    }
    if (!ts_it->is_string()) {
      throw Error(ErrorCode::kDataError,
                  "timestamp on line " + std::to_string(li + 1) + " must be a string");
    }
    row.timestamp = ts_it->get<std::string>();
    row.numeric.reserve(numeric_columns.size());
    for (std::size_t c = 0; c < numeric_columns.size(); ++c) {
      auto it = j.find(numeric_columns[c]);
      if (it == j.end() || it->is_null()) {
        row.numeric.push_back(kNaN);
        continue;
      }
      column_seen[c] = true;
      if (!it->is_number()) {
        throw Error(ErrorCode::kDataError, "value of '" + numeric_columns[c] + "' on line " +
                                               std::to_string(li + 1) + " is not a number");
      }
      double v = it->get<double>();
      if (std::isinf(v)) {
        throw Error(ErrorCode::kDataError, "non-finite value of '" + numeric_columns[c] +
                                               "' on line " + std::to_string(li + 1));
      }
      row.numeric.push_back(v);
    }
    for (const std::string& sc : m.static_columns) {
      auto it = j.find(sc);
      if (it == j.end() || it->is_null()) {
        row.statics.push_back({});
        row.static_present.push_back(false);
      } else if (it->is_string()) {
        row.statics.push_back({it->get<std::string>(), true});
        row.static_present.push_back(true);
      } else if (it->is_number_integer()) {
        row.statics.push_back({std::to_string(it->get<std::int64_t>()), false});
        row.static_present.push_back(true);
      } else if (it->is_number()) {
        // Canonicalized at load so a write-back round-trips to itself.
        row.statics.push_back({JsonWriter::number(it->get<double>()), false});
        row.static_present.push_back(true);
      } else {
        throw Error(ErrorCode::kDataError,
                    "static '" + sc + "' on line " + std::to_string(li + 1) +
                        " must be a string or number");
      }
    }
    rows.push_back(std::move(row));
  }
  // Declared columns must appear somewhere in the file; per-record absence
  // is just a missing value.
  for (std::size_t c = 0; c < numeric_columns.size(); ++c) {
    if (!column_seen[c] && !rows.empty()) {
      throw Error(ErrorCode::kMissingColumn,
                  "column '" + numeric_columns[c] + "' never appears in " + path.string());
    }
  }
  return rows;
}

}  // namespace

void check_manifest(const DatasetManifest& m) {
  if (m.format != "csv" && m.format != "jsonl") {
    throw Error(ErrorCode::kSchemaError, "format must be 'csv' or 'jsonl', got '" + m.format + "'");
  }
  if (m.target_columns.empty()) {
    throw Error(ErrorCode::kSchemaError, "target_columns must not be empty");
  }
  if (m.id_column.empty() || m.timestamp_column.empty() || m.data_path.empty()) {
    throw Error(ErrorCode::kSchemaError,
                "data_path, id_column and timestamp_column are required");
  }
  parse_frequency(m.frequency);
  std::map<std::string, std::string> seen = {{m.id_column, "id_column"},
                                             {m.timestamp_column, "timestamp_column"}};
  auto claim = [&](const std::vector<std::string>& cols, const std::string& role) {
    for (const std::string& c : cols) {
      auto [it, inserted] = seen.emplace(c, role);
      if (!inserted) {
        throw Error(ErrorCode::kSchemaError,
                    "column '" + c + "' appears in both " + it->second + " and " + role);
      }
    }
  };
  claim(m.target_columns, "target_columns");
  claim(m.past_dynamic_columns, "past_dynamic_columns");
  claim(m.known_dynamic_columns, "known_dynamic_columns");
  claim(m.static_columns, "static_columns");
}

DatasetManifest parse_manifest(const std::filesystem::path& yaml_path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(yaml_path.string());
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kSchemaError, yaml_path.string() + ": " + e.what());
  }
  return detail::manifest_from_yaml(root, yaml_path.parent_path().string(),
                                    yaml_path.string());
}

std::filesystem::path resolve_data_path(const DatasetManifest& m) {
  std::filesystem::path p(m.data_path);
  if (p.is_absolute()) return p;
  std::filesystem::path from_base =
      m.base_dir.empty() ? p : std::filesystem::path(m.base_dir) / p;
  if (std::filesystem::exists(from_base)) return from_base;
  if (const char* root = std::getenv("FOREVAL_DATA_ROOT")) {
    std::filesystem::path from_root = std::filesystem::path(root) / p;
    if (std::filesystem::exists(from_root)) return from_root;
  }
  return from_base;
}

std::size_t TimeSeriesDataset::min_length() const {
  std::size_t m = std::numeric_limits<std::size_t>::max();
  for (const Series& s : series) m = std::min(m, s.length);
  return series.empty() ? 0 : m;
}

TimeSeriesDataset load_dataset(const DatasetManifest& manifest) {
  check_manifest(manifest);
  const std::filesystem::path path = resolve_data_path(manifest);

  std::vector<std::string> numeric_columns = manifest.target_columns;
  numeric_columns.insert(numeric_columns.end(), manifest.past_dynamic_columns.begin(),
                         manifest.past_dynamic_columns.end());
  numeric_columns.insert(numeric_columns.end(), manifest.known_dynamic_columns.begin(),
                         manifest.known_dynamic_columns.end());

  std::vector<RawRow> rows = manifest.format == "csv"
                                 ? read_csv_rows(manifest, path, numeric_columns)
                                 : read_jsonl_rows(manifest, path, numeric_columns);
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no data rows in " + path.string());
  }

  TimeSeriesDataset ds;
  ds.manifest = manifest;
  ds.frequency = parse_frequency(manifest.frequency);

  for (RawRow& row : rows) {
    row.key = spacing_key(ds.frequency, parse_timestamp(row.timestamp));
  }

  // Group rows by id, series ordered by first appearance.
  std::map<std::string, std::size_t> series_index;
  std::vector<std::vector<RawRow*>> grouped;
  for (RawRow& row : rows) {
    auto [it, inserted] = series_index.emplace(row.id, grouped.size());
    if (inserted) grouped.emplace_back();
    grouped[it->second].push_back(&row);
  }

  const std::size_t n_targets = manifest.target_columns.size();
  const std::size_t n_past = manifest.past_dynamic_columns.size();
  const std::size_t n_known = manifest.known_dynamic_columns.size();
  const std::int64_t step = expected_spacing(ds.frequency);

  for (auto& group : grouped) {
    std::stable_sort(group.begin(), group.end(),
                     [](const RawRow* a, const RawRow* b) { return a->key < b->key; });
    Series s;
    s.item_id = group.front()->id;
    for (std::size_t i = 1; i < group.size(); ++i) {
      std::int64_t diff = group[i]->key - group[i - 1]->key;
      if (diff == 0) {
        throw Error(ErrorCode::kIrregularTimestamps,
                    "duplicate timestamp '" + group[i]->timestamp + "' in series '" +
                        s.item_id + "'");
      }
      if (diff != step) {
        throw Error(ErrorCode::kIrregularTimestamps,
                    "gap between '" + group[i - 1]->timestamp + "' and '" +
                        group[i]->timestamp + "' in series '" + s.item_id +
                        "' (expected spacing " + std::to_string(step) + ", got " +
                        std::to_string(diff) + ")");
    }
    }

    // T: rows up to the last one carrying any observed target. Later rows
    // only extend the known-covariate timeline.
    std::size_t t_len = 0;
    for (std::size_t i = group.size(); i > 0; --i) {
      const RawRow* row = group[i - 1];
      bool any = false;
      for (std::size_t d = 0; d < n_targets; ++d) {
        if (!std::isnan(row->numeric[d])) { any = true; break; }
      }
      if (any) { t_len = i; break; }
    }
    if (t_len == 0) {
      throw Error(ErrorCode::kEmptyDataset,
                  "series '" + s.item_id + "' has no observed target values");
    }
    s.length = t_len;

    s.timestamps.reserve(group.size());
    s.keys.reserve(group.size());
    for (const RawRow* row : group) {
      s.timestamps.push_back(row->timestamp);
      s.keys.push_back(row->key);
    }
    s.targets.assign(n_targets, {});
    for (std::size_t d = 0; d < n_targets; ++d) {
      s.targets[d].reserve(t_len);
      for (std::size_t i = 0; i < t_len; ++i) s.targets[d].push_back(group[i]->numeric[d]);
    }
    s.past_dynamic.assign(n_past, {});
    for (std::size_t c = 0; c < n_past; ++c) {
      s.past_dynamic[c].reserve(t_len);
      for (std::size_t i = 0; i < t_len; ++i) {
        s.past_dynamic[c].push_back(group[i]->numeric[n_targets + c]);
      }
    }
    s.known_dynamic.assign(n_known, {});
    for (std::size_t c = 0; c < n_known; ++c) {
      s.known_dynamic[c].reserve(group.size());
      for (const RawRow* row : group) {
        s.known_dynamic[c].push_back(row->numeric[n_targets + n_past + c]);
      }
    }
    for (std::size_t c = 0; c < manifest.static_columns.size(); ++c) {
      const StaticValue* value = nullptr;
      for (const RawRow* row : group) {
        if (!row->static_present[c]) continue;
        if (value == nullptr) {
          value = &row->statics[c];
        } else if (!(*value == row->statics[c])) {
          throw Error(ErrorCode::kDataError,
                      "static column '" + manifest.static_columns[c] +
                          "' is not constant within series '" + s.item_id + "'");
        }
      }
      if (value == nullptr) {
        throw Error(ErrorCode::kDataError,
                    "static column '" + manifest.static_columns[c] +
                        "' has no value for series '" + s.item_id + "'");
      }
      s.static_values.push_back(*value);
    }
    ds.series.push_back(std::move(s));
  }
  return ds;
}

void write_csv(const TimeSeriesDataset& ds, const std::filesystem::path& path) {
  const DatasetManifest& m = ds.manifest;
  std::string out;
  out += csv_escape(m.id_column);
  out += ',';
  out += csv_escape(m.timestamp_column);
  for (const auto& c : m.target_columns) { out += ','; out += csv_escape(c); }
  for (const auto& c : m.past_dynamic_columns) { out += ','; out += csv_escape(c); }
  for (const auto& c : m.known_dynamic_columns) { out += ','; out += csv_escape(c); }
  for (const auto& c : m.static_columns) { out += ','; out += csv_escape(c); }
  out += '\n';
  for (const Series& s : ds.series) {
    for (std::size_t i = 0; i < s.timeline_length(); ++i) {
      out += csv_escape(s.item_id);
      out += ',';
      out += csv_escape(s.timestamps[i]);
      for (std::size_t d = 0; d < s.targets.size(); ++d) {
        out += ',';
        if (i < s.length) out += number_cell(s.targets[d][i]);
      }
      for (std::size_t c = 0; c < s.past_dynamic.size(); ++c) {
        out += ',';
        if (i < s.length) out += number_cell(s.past_dynamic[c][i]);
      }
      for (std::size_t c = 0; c < s.known_dynamic.size(); ++c) {
        out += ',';
        out += number_cell(s.known_dynamic[c][i]);
      }
      for (const StaticValue& v : s.static_values) {
        out += ',';
        out += csv_escape(v.text);
      }
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

void write_jsonl(const TimeSeriesDataset& ds, const std::filesystem::path& path) {
  const DatasetManifest& m = ds.manifest;
  std::string out;
  for (const Series& s : ds.series) {
    for (std::size_t i = 0; i < s.timeline_length(); ++i) {
      JsonWriter w;
      w.begin_object();
      w.key(m.id_column).value(s.item_id);
      w.key(m.timestamp_column).value(s.timestamps[i]);
      for (std::size_t d = 0; d < s.targets.size(); ++d) {
        w.key(m.target_columns[d]);
        if (i < s.length) w.value(s.targets[d][i]); else w.null();
      }
      for (std::size_t c = 0; c < s.past_dynamic.size(); ++c) {
        w.key(m.past_dynamic_columns[c]);
        if (i < s.length) w.value(s.past_dynamic[c][i]); else w.null();
      }
      for (std::size_t c = 0; c < s.known_dynamic.size(); ++c) {
        w.key(m.known_dynamic_columns[c]).value(s.known_dynamic[c][i]);
      }
      for (std::size_t c = 0; c < s.static_values.size(); ++c) {
        const StaticValue& v = s.static_values[c];
        w.key(m.static_columns[c]);
        if (v.quoted) {
          w.value(v.text);
        } else {
          w.raw(v.text);
        }
      }
      w.end_object();
      out += w.take();
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

WindowSlice slice_window(const TimeSeriesDataset& ds, const EvaluationWindow& window,
                         const Task& task) {
  const std::size_t cutoff = window.cutoff;
  const std::size_t horizon = static_cast<std::size_t>(task.horizon);
  for (const Series& s : ds.series) {
    if (s.length < cutoff + horizon) {
      throw Error(ErrorCode::kInsufficientLength,
                  "series '" + s.item_id + "' has " + std::to_string(s.length) +
                      " observations, window " + std::to_string(window.index) + " needs " +
                      std::to_string(cutoff + horizon));
    }
  }
  return WindowSlice(ds, cutoff, horizon);
}

ValidationReport validate_dataset(const TimeSeriesDataset& ds, const Task& task) {
  ValidationReport report;
  const std::size_t h = static_cast<std::size_t>(task.horizon);
  const std::size_t w = static_cast<std::size_t>(task.num_windows);
  report.required_length = (w + 2) * h + 1;
  report.minimum_length = 3 * h + 1;

  for (const Series& s : ds.series) {
    SeriesCheck check;
    check.item_id = s.item_id;
    check.length = s.length;
    check.sufficient_history = s.length >= report.required_length;
    for (std::size_t d = 0; d < s.targets.size(); ++d) {
      std::size_t nans = 0;
      for (double v : s.targets[d]) {
        if (std::isnan(v)) ++nans;
      }
      check.nan_counts.push_back(nans);
      bool risk = false;
      if (s.length <= static_cast<std::size_t>(task.seasonality)) {
        risk = true;
      } else {
        std::span<const double> hist(s.targets[d].data(), s.length);
        risk = seasonal_error(hist, task.seasonality).zero_scale;
      }
      check.zero_scale_risk.push_back(risk);
      if (nans > 0) {
        report.defects.push_back(
            {false, "series '" + s.item_id + "' target '" +
                        ds.manifest.target_columns[d] + "' has " + std::to_string(nans) +
                        " missing values"});
      }
      if (risk) {
        report.defects.push_back(
            {true, "series '" + s.item_id + "' target '" + ds.manifest.target_columns[d] +
                       "' has zero seasonal error at m=" + std::to_string(task.seasonality) +
                       " (zero-scale risk)"});
      }
    }
    if (s.length < report.minimum_length) {
      report.defects.push_back(
          {true, "series '" + s.item_id + "' has " + std::to_string(s.length) +
                     " observations, fewer than the " + std::to_string(report.minimum_length) +
                     " needed for one window at horizon " + std::to_string(task.horizon)});
    } else if (!check.sufficient_history) {
      report.defects.push_back(
          {false, "series '" + s.item_id + "' has " + std::to_string(s.length) +
                      " observations, fewer than the " + std::to_string(report.required_length) +
                      " needed for " + std::to_string(task.num_windows) +
                      " windows (window count will shrink)"});
    }
    report.series.push_back(std::move(check));
  }
  return report;
}

}  // namespace foreval
