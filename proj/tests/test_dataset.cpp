#include "foreval/dataset.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "foreval/errors.hpp"
#include "foreval/task.hpp"
#include "foreval/util/io.hpp"
#include "support/synthetic.hpp"

using foreval::DatasetManifest;
using foreval::Error;
using foreval::ErrorCode;
using foreval::TimeSeriesDataset;
using testsupport::fresh_temp_dir;

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

DatasetManifest csv_manifest(const fs::path& path) {
  DatasetManifest m;
  m.data_path = path.string();
  m.format = "csv";
  m.id_column = "id";
  m.timestamp_column = "timestamp";
  m.frequency = "D";
  m.target_columns = {"y"};
  return m;
}

bool same_values(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool na = std::isnan(a[i]), nb = std::isnan(b[i]);
    if (na != nb) return false;
    if (!na && a[i] != b[i]) return false;
  }
  return true;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kDataError;
}

}  // namespace

TEST_CASE("csv loading groups by id, keeps NaN holes, sorts by timestamp") {
  const fs::path dir = fresh_temp_dir("csv_load");
  write_text(dir / "d.csv",
             "id,timestamp,y\n"
             "a,2021-01-01,1\n"
             "a,2021-01-04,4\n"     // out of order on purpose
             "a,2021-01-02,2.5\n"
             "a,2021-01-03,\n"
             "b,2021-01-01,10\n"
             "b,2021-01-02,11\n");
  TimeSeriesDataset ds = foreval::load_dataset(csv_manifest(dir / "d.csv"));

  REQUIRE(ds.num_series() == 2);
  CHECK(ds.num_dims() == 1);
  CHECK(ds.series[0].item_id == "a");  // order of first appearance
  CHECK(ds.series[1].item_id == "b");
  REQUIRE(ds.series[0].length == 4);
  CHECK(ds.series[0].targets[0][0] == 1.0);
  CHECK(ds.series[0].targets[0][1] == 2.5);
  CHECK(std::isnan(ds.series[0].targets[0][2]));
  CHECK(ds.series[0].targets[0][3] == 4.0);
  CHECK(ds.series[0].timestamps[1] == "2021-01-02");
  CHECK(ds.series[1].length == 2);
  CHECK(ds.min_length() == 2);
}

TEST_CASE("irregular timestamps are rejected with the offending pair named") {
  const fs::path dir = fresh_temp_dir("csv_irregular");

  write_text(dir / "dup.csv",
             "id,timestamp,y\n"
             "a,2021-01-01,1\n"
             "a,2021-01-01,2\n");
  CHECK(code_of([&] { foreval::load_dataset(csv_manifest(dir / "dup.csv")); }) ==
        ErrorCode::kIrregularTimestamps);

  write_text(dir / "gap.csv",
             "id,timestamp,y\n"
             "a,2021-01-01,1\n"
             "a,2021-01-03,2\n");
  try {
    foreval::load_dataset(csv_manifest(dir / "gap.csv"));
    FAIL("expected an Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIrregularTimestamps);
    CHECK(std::string(e.what()).find("gap") != std::string::npos);
  }

  // Monthly data may drift to month ends without being irregular.
  write_text(dir / "m.csv",
             "id,timestamp,y\n"
             "a,2021-01-31,1\n"
             "a,2021-02-28,2\n"
             "a,2021-03-31,3\n");
  DatasetManifest m = csv_manifest(dir / "m.csv");
  m.frequency = "M";
  CHECK(foreval::load_dataset(m).series[0].length == 3);
}

TEST_CASE("jsonl loading: two dims, known covariate timeline, typed statics") {
  const fs::path dir = fresh_temp_dir("jsonl_load");
  write_text(dir / "d.jsonl",
             R"({"id":"x","timestamp":"2021-01-01","y0":1.0,"y1":5.0,"promo":0.1,"region":3})"
             "\n"
             R"({"id":"x","timestamp":"2021-01-02","y0":2.0,"promo":0.2})"
             "\n"
             R"({"id":"x","timestamp":"2021-01-03","y0":null,"y1":7.0,"promo":0.3,"region":3})"
             "\n"
             R"({"id":"x","timestamp":"2021-01-04","promo":0.4})"
             "\n"
             R"({"id":"x","timestamp":"2021-01-05","promo":0.5})"
             "\n");
  DatasetManifest m;
  m.data_path = (dir / "d.jsonl").string();
  m.format = "jsonl";
  m.id_column = "id";
  m.timestamp_column = "timestamp";
  m.frequency = "D";
  m.target_columns = {"y0", "y1"};
  m.known_dynamic_columns = {"promo"};
  m.static_columns = {"region"};

  TimeSeriesDataset ds = foreval::load_dataset(m);
  REQUIRE(ds.num_series() == 1);
  const foreval::Series& s = ds.series[0];
  // Trailing known-only rows extend the timeline past the targets.
  CHECK(s.length == 3);
  CHECK(s.timeline_length() == 5);
  CHECK(same_values(s.targets[0], {1.0, 2.0, std::nan("")}));
  CHECK(same_values(s.targets[1], {5.0, std::nan(""), 7.0}));
  REQUIRE(s.known_dynamic[0].size() == 5);
  CHECK(s.known_dynamic[0][4] == 0.5);
  REQUIRE(s.static_values.size() == 1);
  CHECK(s.static_values[0].text == "3");
  CHECK_FALSE(s.static_values[0].quoted);  // integer, not string
}

TEST_CASE("schema violations carry specific error codes") {
  const fs::path dir = fresh_temp_dir("schema");

  write_text(dir / "no_y.csv", "id,timestamp,z\na,2021-01-01,1\n");
  CHECK(code_of([&] { foreval::load_dataset(csv_manifest(dir / "no_y.csv")); }) ==
        ErrorCode::kMissingColumn);

  write_text(dir / "empty.csv", "id,timestamp,y\n");
  CHECK(code_of([&] { foreval::load_dataset(csv_manifest(dir / "empty.csv")); }) ==
        ErrorCode::kEmptyDataset);

  // A series whose targets are all missing has no usable observations.
  write_text(dir / "allnan.csv", "id,timestamp,y\na,2021-01-01,\na,2021-01-02,\n");
  CHECK(code_of([&] { foreval::load_dataset(csv_manifest(dir / "allnan.csv")); }) ==
        ErrorCode::kEmptyDataset);

  write_text(dir / "text.csv", "id,timestamp,y\na,2021-01-01,abc\n");
  CHECK(code_of([&] { foreval::load_dataset(csv_manifest(dir / "text.csv")); }) ==
        ErrorCode::kDataError);

  DatasetManifest overlap = csv_manifest(dir / "no_y.csv");
  overlap.past_dynamic_columns = {"y"};
  CHECK(code_of([&] { foreval::check_manifest(overlap); }) == ErrorCode::kSchemaError);

  DatasetManifest bad_format = csv_manifest(dir / "no_y.csv");
  bad_format.format = "parquet";
  CHECK(code_of([&] { foreval::check_manifest(bad_format); }) == ErrorCode::kSchemaError);

  write_text(dir / "static.csv",
             "id,timestamp,y,region\n"
             "a,2021-01-01,1,r1\n"
             "a,2021-01-02,2,r2\n");
  DatasetManifest sm = csv_manifest(dir / "static.csv");
  sm.static_columns = {"region"};
  CHECK(code_of([&] { foreval::load_dataset(sm); }) == ErrorCode::kDataError);
}

TEST_CASE("write and reload is a fixed point for both formats") {
  const fs::path dir = fresh_temp_dir("roundtrip");
  write_text(dir / "d.csv",
             "id,timestamp,y,temp,promo,region\n"
             "a,2021-01-01,1.5,20.25,0,r0\n"
             "a,2021-01-02,,21.5,1,r0\n"
             "a,2021-01-03,0.14285714285714285,22,0,r0\n"
             "b,2021-01-01,10,19,1,r1\n"
             "b,2021-01-02,11,18.5,0,r1\n");
  DatasetManifest m = csv_manifest(dir / "d.csv");
  m.past_dynamic_columns = {"temp"};
  m.known_dynamic_columns = {"promo"};
  m.static_columns = {"region"};

  TimeSeriesDataset ds1 = foreval::load_dataset(m);

  DatasetManifest m2 = m;
  m2.data_path = (dir / "out.csv").string();
  foreval::write_csv(ds1, dir / "out.csv");
  TimeSeriesDataset ds2 = foreval::load_dataset(m2);
  foreval::write_csv(ds2, dir / "out2.csv");
  CHECK(foreval::read_file(dir / "out.csv") == foreval::read_file(dir / "out2.csv"));
  REQUIRE(ds2.num_series() == 2);
  CHECK(same_values(ds2.series[0].targets[0], ds1.series[0].targets[0]));
  CHECK(same_values(ds2.series[0].past_dynamic[0], ds1.series[0].past_dynamic[0]));
  CHECK(ds2.series[1].static_values[0].text == "r1");

  DatasetManifest mj = m;
  mj.format = "jsonl";
  mj.data_path = (dir / "out.jsonl").string();
  foreval::write_jsonl(ds1, dir / "out.jsonl");
  TimeSeriesDataset ds3 = foreval::load_dataset(mj);
  foreval::write_jsonl(ds3, dir / "out2.jsonl");
  CHECK(foreval::read_file(dir / "out.jsonl") == foreval::read_file(dir / "out2.jsonl"));
  CHECK(same_values(ds3.series[0].targets[0], ds1.series[0].targets[0]));
  CHECK(same_values(ds3.series[1].known_dynamic[0], ds1.series[1].known_dynamic[0]));
}

TEST_CASE("prediction input exposes history only, actuals live on the slice") {
  const fs::path dir = fresh_temp_dir("slice");
  std::string csv = "id,timestamp,y,promo\n";
  for (int t = 0; t < 10; ++t) {
    char row[64];
    std::snprintf(row, sizeof(row), "a,2021-01-%02d,%d,%d\n", t + 1, t * 10, t % 2);
    csv += row;
  }
  write_text(dir / "d.csv", csv);
  DatasetManifest m = csv_manifest(dir / "d.csv");
  m.known_dynamic_columns = {"promo"};
  TimeSeriesDataset ds = foreval::load_dataset(m);

  foreval::Task task;
  task.task_name = "t";
  task.horizon = 2;
  foreval::EvaluationWindow window{1, 8};
  foreval::WindowSlice slice = foreval::slice_window(ds, window, task);

  const foreval::PredictionInput& in = slice.input();
  CHECK(in.cutoff() == 8);
  CHECK(in.past_targets(0, 0).size() == 8);    // indices 0..7 only
  CHECK(in.past_targets(0, 0).back() == 70.0);
  CHECK(in.known_dynamic(0, 0).size() == 10);  // through cutoff + horizon
  auto actuals = slice.future_actuals(0, 0);
  REQUIRE(actuals.size() == 2);
  CHECK(actuals[0] == 80.0);
  CHECK(actuals[1] == 90.0);

  // A window that would need targets past the end is refused.
  foreval::EvaluationWindow beyond{2, 9};
  CHECK(code_of([&] { foreval::slice_window(ds, beyond, task); }) ==
        ErrorCode::kInsufficientLength);
}

TEST_CASE("validation separates blocking from informational defects") {
  const fs::path dir = fresh_temp_dir("validate");
  std::string csv = "id,timestamp,y\n";
  for (int t = 0; t < 12; ++t) {
    char row[48];
    std::snprintf(row, sizeof(row), "a,2021-01-%02d,%d\n", t + 1, 5 + (t % 3));
    csv += row;
  }
  // Short series: 4 observations at horizon 2 needs 7 for one window.
  csv += "b,2021-01-01,1\nb,2021-01-02,\nb,2021-01-03,3\nb,2021-01-04,4\n";
  write_text(dir / "d.csv", csv);
  TimeSeriesDataset ds = foreval::load_dataset(csv_manifest(dir / "d.csv"));

  foreval::Task task;
  task.task_name = "t";
  task.horizon = 2;
  task.num_windows = 3;
  task.seasonality = 1;
  foreval::ValidationReport report = foreval::validate_dataset(ds, task);

  CHECK(report.required_length == (3 + 2) * 2 + 1);
  CHECK(report.minimum_length == 3 * 2 + 1);
  REQUIRE(report.series.size() == 2);
  CHECK(report.series[0].sufficient_history);
  CHECK_FALSE(report.series[1].sufficient_history);
  CHECK(report.series[1].nan_counts[0] == 1);
  CHECK_FALSE(report.ok());  // series b cannot host even one window

  bool saw_blocking_short = false, saw_nan_note = false;
  for (const foreval::Defect& d : report.defects) {
    if (d.blocking && d.message.find("'b'") != std::string::npos) saw_blocking_short = true;
    if (!d.blocking && d.message.find("missing values") != std::string::npos) {
      saw_nan_note = true;
    }
  }
  CHECK(saw_blocking_short);
  CHECK(saw_nan_note);

  // A constant series has zero seasonal error: blocking zero-scale defect.
  write_text(dir / "flat.csv",
             "id,timestamp,y\n"
             "c,2021-01-01,5\nc,2021-01-02,5\nc,2021-01-03,5\n"
             "c,2021-01-04,5\nc,2021-01-05,5\nc,2021-01-06,5\n"
             "c,2021-01-07,5\nc,2021-01-08,5\n");
  TimeSeriesDataset flat = foreval::load_dataset(csv_manifest(dir / "flat.csv"));
  foreval::Task t2;
  t2.task_name = "t2";
  t2.horizon = 2;
  t2.num_windows = 1;
  t2.seasonality = 1;
  foreval::ValidationReport r2 = foreval::validate_dataset(flat, t2);
  REQUIRE(r2.series.size() == 1);
  CHECK(r2.series[0].zero_scale_risk[0]);
  CHECK_FALSE(r2.ok());
}

TEST_CASE("data path resolution prefers base_dir, then the data root env var") {
  const fs::path base = fresh_temp_dir("resolve_base");
  const fs::path root = fresh_temp_dir("resolve_root");
  write_text(root / "d.csv", "id,timestamp,y\na,2021-01-01,1\n");

  DatasetManifest m;
  m.data_path = "d.csv";
  m.format = "csv";
  m.id_column = "id";
  m.timestamp_column = "timestamp";
  m.frequency = "D";
  m.target_columns = {"y"};
  m.base_dir = base.string();

  ::setenv("FOREVAL_DATA_ROOT", root.string().c_str(), 1);
  CHECK(foreval::resolve_data_path(m) == root / "d.csv");

  write_text(base / "d.csv", "id,timestamp,y\na,2021-01-01,2\n");
  CHECK(foreval::resolve_data_path(m) == base / "d.csv");
  ::unsetenv("FOREVAL_DATA_ROOT");

  // Nothing exists: the base_dir candidate is reported so open errors name it.
  DatasetManifest gone = m;
  gone.data_path = "missing.csv";
  CHECK(foreval::resolve_data_path(gone) == base / "missing.csv");
}
