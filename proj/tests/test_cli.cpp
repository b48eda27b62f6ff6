#include "foreval/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "foreval/errors.hpp"
#include "foreval/summary.hpp"
#include "foreval/task.hpp"
#include "support/synthetic.hpp"

#ifdef FOREVAL_BIN
#include <sys/wait.h>
#endif

using foreval::Error;
using foreval::ErrorCode;
using foreval::EvaluationSummary;
using foreval::LeaderboardOptions;
using foreval::RunBaselinesOptions;
using foreval::ScoreOptions;
using foreval::Task;
using foreval::ValidateOptions;

namespace {

namespace fs = std::filesystem;

// cmd_* report progress on stdout; capture it so assertions can read it and
// the test log stays quiet.
class CoutCapture {
 public:
  CoutCapture() : old_(std::cout.rdbuf(buffer_.rdbuf())) {}
  ~CoutCapture() { std::cout.rdbuf(old_); }
  std::string text() const { return buffer_.str(); }

 private:
  std::ostringstream buffer_;
  std::streambuf* old_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// One daily series, y_t = t + 1 for t = 0..19. With seasonality 4 the lag-4
// differences are a constant 4, so every metric is finite and nonzero.
void write_line_csv(const fs::path& path) {
  std::string csv = "id,timestamp,y\n";
  for (int t = 0; t < 20; ++t) {
    csv += "a,2021-01-" + std::string(t + 1 < 10 ? "0" : "") + std::to_string(t + 1) + "," +
           std::to_string(t + 1) + "\n";
  }
  write_text(path, csv);
}

std::string line_task_yaml(const std::string& name, int num_windows) {
  return "  - task_name: " + name +
         "\n"
         "    dataset:\n"
         "      data_path: data.csv\n"
         "      format: csv\n"
         "      id_column: id\n"
         "      timestamp_column: timestamp\n"
         "      frequency: D\n"
         "      target_columns: [y]\n"
         "    horizon: 4\n"
         "    num_windows: " +
         std::to_string(num_windows) +
         "\n"
         "    seasonality: 4\n"
         "    quantile_levels: [0.5]\n";
}

// Benchmark with the single line-series task above, one window, cutoff 16.
fs::path write_line_benchmark(const fs::path& dir, int num_windows = 1) {
  write_line_csv(dir / "data.csv");
  const fs::path bench = dir / "benchmark.yaml";
  write_text(bench, "name: cli-demo\ntasks:\n" + line_task_yaml("t1", num_windows));
  return bench;
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

TEST_CASE("validate accepts a feasible benchmark and rejects a short one") {
  const fs::path dir = testsupport::fresh_temp_dir("cli_validate");
  const fs::path bench = testsupport::write_mixed_benchmark(dir / "bench", 11, 6);
  {
    CoutCapture cap;
    CHECK(foreval::cmd_validate({bench.string()}) == 0);
    CHECK(cap.text().find("6 task(s) feasible") != std::string::npos);
    CHECK(cap.text().find("FAIL") == std::string::npos);
  }

  // 8 rows cannot host horizon 4: the minimum feasible length is 13.
  const fs::path short_dir = dir / "short";
  fs::create_directories(short_dir);
  std::string csv = "id,timestamp,y\n";
  for (int t = 0; t < 8; ++t) {
    csv += "a,2021-01-0" + std::to_string(t + 1) + "," + std::to_string(t + 1) + "\n";
  }
  write_text(short_dir / "data.csv", csv);
  write_text(short_dir / "benchmark.yaml",
             "name: short\ntasks:\n" + line_task_yaml("tiny", 1));
  {
    CoutCapture cap;
    CHECK(foreval::cmd_validate({(short_dir / "benchmark.yaml").string()}) == 1);
    CHECK(cap.text().find("1 of 1 task(s) infeasible") != std::string::npos);
  }

  CHECK_THROWS_AS(foreval::cmd_validate({(dir / "absent.yaml").string()}), Error);
  fs::remove_all(dir);
}

TEST_CASE("run-baselines writes one summaries file per baseline") {
  const fs::path dir = testsupport::fresh_temp_dir("cli_baselines");
  const fs::path bench = testsupport::write_mixed_benchmark(dir / "bench", 12, 6);
  RunBaselinesOptions opts;
  opts.benchmark_path = bench.string();
  opts.out_dir = (dir / "out").string();
  {
    CoutCapture cap;
    CHECK(foreval::cmd_run_baselines(opts) == 0);
  }
  for (const std::string name : {"seasonal_naive", "naive", "drift"}) {
    const fs::path path = dir / "out" / (name + ".jsonl");
    REQUIRE(fs::exists(path));
    std::vector<EvaluationSummary> lines = foreval::read_summaries(path);
    REQUIRE(lines.size() == 6);
    for (const EvaluationSummary& s : lines) {
      CHECK(s.model_name == name);
      CHECK_FALSE(s.failed);
      CHECK(s.runtime_s >= 0.0);
      CHECK(s.task_metrics.count("mase") == 1);
      CHECK(s.task_metrics.count("sql") == 1);
      CHECK(s.num_windows >= 1);
    }
  }

  // A requested subset only writes that subset.
  RunBaselinesOptions subset = opts;
  subset.out_dir = (dir / "subset").string();
  subset.baselines = {"naive"};
  {
    CoutCapture cap;
    CHECK(foreval::cmd_run_baselines(subset) == 0);
  }
  CHECK(fs::exists(dir / "subset" / "naive.jsonl"));
  CHECK_FALSE(fs::exists(dir / "subset" / "seasonal_naive.jsonl"));

  RunBaselinesOptions bad = opts;
  bad.baselines = {"arima"};
  CHECK(code_of([&] { foreval::cmd_run_baselines(bad); }) == ErrorCode::kSchemaError);
  bad.baselines = {"naive", "naive"};
  CHECK(code_of([&] { foreval::cmd_run_baselines(bad); }) == ErrorCode::kSchemaError);
  fs::remove_all(dir);
}

TEST_CASE("an unscorable task fails alone without blocking the rest") {
  const fs::path dir = testsupport::fresh_temp_dir("cli_isolation");
  write_line_csv(dir / "data.csv");
  // 15 hourly rows: feasible for horizon 2, but a full season of 24 never
  // fits, so neither the seasonal forecast nor the seasonal error scale can
  // be computed. Every baseline fails that task; the daily task still
  // scores.
  std::string csv = "id,timestamp,y\n";
  for (int t = 0; t < 15; ++t) {
    csv += "a,2021-01-01 " + std::string(t < 10 ? "0" : "") + std::to_string(t) + ":00," +
           std::to_string(t * t % 11 + 1) + "\n";
  }
  write_text(dir / "hourly.csv", csv);
  write_text(dir / "benchmark.yaml",
             "name: isolation\ntasks:\n" + line_task_yaml("ok", 1) +
                 "  - task_name: snfail\n"
                 "    dataset:\n"
                 "      data_path: hourly.csv\n"
                 "      format: csv\n"
                 "      id_column: id\n"
                 "      timestamp_column: timestamp\n"
                 "      frequency: \"H\"\n"
                 "      target_columns: [y]\n"
                 "    horizon: 2\n"
                 "    num_windows: 1\n");

  RunBaselinesOptions opts;
  opts.benchmark_path = (dir / "benchmark.yaml").string();
  opts.out_dir = (dir / "out").string();
  std::string log;
  {
    CoutCapture cap;
    CHECK(foreval::cmd_run_baselines(opts) == 0);
    log = cap.text();
  }
  CHECK(log.find("snfail: seasonal_naive FAILED") != std::string::npos);

  std::vector<EvaluationSummary> sn =
      foreval::read_summaries(dir / "out" / "seasonal_naive.jsonl");
  REQUIRE(sn.size() == 2);
  CHECK_FALSE(sn[0].failed);
  CHECK(sn[1].failed);
  CHECK(sn[1].failure_reason.find("HistoryTooShort") != std::string::npos);

  // Naive and drift produce forecasts, but scoring them needs the same
  // seasonal scale, so the failure is uniform across baselines.
  for (const std::string name : {"naive", "drift"}) {
    std::vector<EvaluationSummary> other =
        foreval::read_summaries(dir / "out" / (name + ".jsonl"));
    REQUIRE(other.size() == 2);
    CHECK_FALSE(other[0].failed);
    CHECK(other[1].failed);
    CHECK(other[1].failure_reason.find("HistoryTooShort") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("scoring dumped forecasts reproduces the baseline summaries") {
  const fs::path dir = testsupport::fresh_temp_dir("cli_roundtrip");
  const fs::path bench = testsupport::write_mixed_benchmark(dir / "bench", 13, 6);
  RunBaselinesOptions opts;
  opts.benchmark_path = bench.string();
  opts.out_dir = (dir / "out").string();
  opts.dump_forecasts_dir = (dir / "dump").string();
  {
    CoutCapture cap;
    CHECK(foreval::cmd_run_baselines(opts) == 0);
  }
  for (const std::string name : {"seasonal_naive", "drift"}) {
    ScoreOptions sopts;
    sopts.benchmark_path = bench.string();
    sopts.submission_path = (dir / "dump" / (name + "_forecasts.jsonl")).string();
    sopts.out_path = (dir / ("rescored_" + name + ".jsonl")).string();
    {
      CoutCapture cap;
      CHECK(foreval::cmd_score(sopts) == 0);
    }
    CHECK(read_bytes(sopts.out_path) == read_bytes(dir / "out" / (name + ".jsonl")));
  }
  fs::remove_all(dir);
}

TEST_CASE("score accepts a perfect submission and reports zero error") {
  const fs::path dir = testsupport::fresh_temp_dir("cli_score");
  const fs::path bench = write_line_benchmark(dir);
  // Cutoff 16: the held-out actuals are 17..20.
  write_text(dir / "sub.jsonl",
             "{\"task_name\":\"t1\",\"model_name\":\"oracle\",\"window_index\":1,"
             "\"item_id\":\"a\",\"point\":[17,18,19,20],"
             "\"quantiles\":{\"0.5\":[17,18,19,20]},\"runtime_s\":2.5}\n");
  ScoreOptions opts;
  opts.benchmark_path = bench.string();
  opts.submission_path = (dir / "sub.jsonl").string();
  opts.out_path = (dir / "summaries.jsonl").string();
  {
    CoutCapture cap;
    CHECK(foreval::cmd_score(opts) == 0);
    CHECK(cap.text().find("mase=0") != std::string::npos);
  }
  std::vector<EvaluationSummary> out = foreval::read_summaries(opts.out_path);
  REQUIRE(out.size() == 1);
  CHECK(out[0].model_name == "oracle");
  CHECK(out[0].task_metrics.at("mase") == 0.0);
  CHECK(out[0].task_metrics.at("sql") == 0.0);
  CHECK(out[0].task_metrics.at("wape") == 0.0);
  CHECK(out[0].task_metrics.at("wql") == 0.0);
  CHECK(out[0].runtime_s == 2.5);
  CHECK(out[0].cutoffs == std::vector<std::int64_t>{16});
  CHECK_FALSE(out[0].trained_on_this_dataset);
  fs::remove_all(dir);
}

TEST_CASE("score propagates leakage flags and declared failures") {
  const fs::path dir = testsupport::fresh_temp_dir("cli_flags");
  const fs::path bench = write_line_benchmark(dir);
  write_text(dir / "leaky.jsonl",
             "{\"task_name\":\"t1\",\"model_name\":\"m\",\"window_index\":1,"
             "\"item_id\":\"a\",\"point\":[17,18,19,20],"
             "\"quantiles\":{\"0.5\":[17,18,19,20]},\"trained_on_this_dataset\":true}\n");
  ScoreOptions opts;
  opts.benchmark_path = bench.string();
  opts.submission_path = (dir / "leaky.jsonl").string();
  opts.out_path = (dir / "leaky_out.jsonl").string();
  {
    CoutCapture cap;
    CHECK(foreval::cmd_score(opts) == 0);
    CHECK(cap.text().find("[trained on this dataset]") != std::string::npos);
  }
  CHECK(foreval::read_summaries(opts.out_path)[0].trained_on_this_dataset);

  write_text(dir / "failed.jsonl",
             "{\"task_name\":\"t1\",\"model_name\":\"m\",\"failed\":true,"
             "\"reason\":\"out of memory\"}\n");
  opts.submission_path = (dir / "failed.jsonl").string();
  opts.out_path = (dir / "failed_out.jsonl").string();
  {
    CoutCapture cap;
    CHECK(foreval::cmd_score(opts) == 0);
  }
  std::vector<EvaluationSummary> out = foreval::read_summaries(opts.out_path);
  CHECK(out[0].failed);
  CHECK(out[0].failure_reason == "out of memory");
  fs::remove_all(dir);
}

TEST_CASE("score rejects incomplete or inconsistent submissions") {
  const fs::path dir = testsupport::fresh_temp_dir("cli_badsub");
  const fs::path bench = write_line_benchmark(dir);
  const fs::path two_window_dir = dir / "w2";
  fs::create_directories(two_window_dir);
  const fs::path bench2 = write_line_benchmark(two_window_dir, 2);

  auto score_with = [&](const fs::path& b, const std::string& records) {
    write_text(dir / "sub.jsonl", records);
    ScoreOptions opts;
    opts.benchmark_path = b.string();
    opts.submission_path = (dir / "sub.jsonl").string();
    opts.out_path = (dir / "out.jsonl").string();
    CoutCapture cap;
    foreval::cmd_score(opts);
  };
  const std::string good =
      "{\"task_name\":\"t1\",\"model_name\":\"m\",\"window_index\":1,\"item_id\":\"a\","
      "\"point\":[17,18,19,20],\"quantiles\":{\"0.5\":[17,18,19,20]}}\n";

  // Two windows in the benchmark, only the first submitted.
  CHECK(code_of([&] { score_with(bench2, good); }) == ErrorCode::kIncompleteSubmission);

  CHECK(code_of([&] {
          score_with(bench, "{\"task_name\":\"zzz\",\"model_name\":\"m\",\"window_index\":1,"
                            "\"item_id\":\"a\",\"point\":[1,2,3,4]}\n");
        }) == ErrorCode::kDataError);

  CHECK(code_of([&] {
          score_with(bench, "{\"task_name\":\"t1\",\"model_name\":\"m\",\"window_index\":1,"
                            "\"item_id\":\"a\",\"point\":[17,18,19]}\n");
        }) == ErrorCode::kShapeMismatch);

  // Records disagreeing on the leakage flag poison the whole task.
  const std::string conflicted =
      "{\"task_name\":\"t1\",\"model_name\":\"m\",\"window_index\":1,\"item_id\":\"a\","
      "\"point\":[1,2,3,4],\"trained_on_this_dataset\":true}\n"
      "{\"task_name\":\"t1\",\"model_name\":\"m\",\"window_index\":2,\"item_id\":\"a\","
      "\"point\":[1,2,3,4],\"trained_on_this_dataset\":false}\n";
  CHECK(code_of([&] { score_with(bench2, conflicted); }) ==
        ErrorCode::kConflictingLeakageFlag);

  // Declaring failure while also submitting forecasts is contradictory.
  CHECK(code_of([&] {
          score_with(bench, good + "{\"task_name\":\"t1\",\"model_name\":\"m\","
                                   "\"failed\":true,\"reason\":\"x\"}\n");
        }) == ErrorCode::kDataError);

  // Two submissions cannot share a file.
  CHECK(code_of([&] {
          score_with(bench, good + "{\"task_name\":\"t1\",\"model_name\":\"other\","
                                   "\"window_index\":1,\"item_id\":\"a\","
                                   "\"point\":[1,2,3,4]}\n");
        }) == ErrorCode::kDataError);
  fs::remove_all(dir);
}

TEST_CASE("leaderboard imputes, ranks, and writes identical artifacts on rerun") {
  const fs::path dir = testsupport::fresh_temp_dir("cli_leaderboard");

  // Two tasks, three models. beta leaked t1, alpha failed t2; after
  // imputation both cells carry the baseline's score.
  Task t1;
  t1.task_name = "t1";
  t1.dataset.data_path = "d.csv";
  t1.dataset.frequency = "D";
  t1.horizon = 4;
  t1.quantile_levels = {0.5};
  Task t2 = t1;
  t2.task_name = "t2";
  const std::vector<foreval::EvaluationWindow> windows = {{1, 16}};

  auto entry = [&](const Task& task, const std::string& model, double mase, double runtime,
                   bool leaked) {
    EvaluationSummary s = foreval::summarize(task, windows, {{{"mase", mase}}}, model,
                                             runtime, leaked);
    return s;
  };
  std::vector<EvaluationSummary> all;
  all.push_back(entry(t1, "seasonal_naive", 1.0, 0.4, false));
  all.push_back(entry(t2, "seasonal_naive", 1.0, 0.6, false));
  all.push_back(entry(t1, "alpha", 0.8, 1.0, false));
  all.push_back(foreval::failed_summary(t2, "alpha", "crashed"));
  all.push_back(entry(t1, "beta", 1.2, 2.0, true));
  all.push_back(entry(t2, "beta", 0.9, 2.0, false));
  foreval::write_summaries(all, dir / "all.jsonl");

  LeaderboardOptions opts;
  opts.summaries = {(dir / "all.jsonl").string()};
  opts.out_dir = (dir / "lb1").string();
  opts.bootstrap_samples = 50;
  opts.seed = 5;
  opts.marginal_ci = true;
  std::string log;
  {
    CoutCapture cap;
    CHECK(foreval::cmd_leaderboard(opts) == 0);
    log = cap.text();
  }
  CHECK(log.find("imputed t2/alpha from seasonal_naive (failure)") != std::string::npos);
  CHECK(log.find("imputed t1/beta from seasonal_naive (leakage)") != std::string::npos);

  const std::string md = read_bytes(dir / "lb1" / "leaderboard.md");
  CHECK(md.find("| seasonal_naive | ") != std::string::npos);
  CHECK(md.find("## Pairwise win rate") != std::string::npos);

  nlohmann::json j = nlohmann::json::parse(read_bytes(dir / "lb1" / "leaderboard.json"));
  CHECK(j["num_tasks"] == 2);
  CHECK(j["model_names"] == nlohmann::json({"alpha", "beta", "seasonal_naive"}));
  CHECK(j["imputations"].size() == 2);
  // The baseline's skill is identically zero and anchors the Elo scale.
  for (const auto& row : j["models"]) {
    if (row["model_name"] == "seasonal_naive") CHECK(row["skill"] == 0.0);
    CHECK(row["win_rate"].get<double>() >= 0.0);
    CHECK(row["win_rate"].get<double>() <= 1.0);
  }
  REQUIRE(j["bradley_terry"].is_object());
  CHECK(j["bradley_terry"]["theta"][2] == 1000.0);

  LeaderboardOptions rerun = opts;
  rerun.out_dir = (dir / "lb2").string();
  {
    CoutCapture cap;
    CHECK(foreval::cmd_leaderboard(rerun) == 0);
  }
  for (const std::string name : {"leaderboard.md", "leaderboard.csv", "leaderboard.json"}) {
    CHECK(read_bytes(dir / "lb1" / name) == read_bytes(dir / "lb2" / name));
  }

  LeaderboardOptions bad = opts;
  bad.formats = {"pdf"};
  CHECK(code_of([&] { foreval::cmd_leaderboard(bad); }) == ErrorCode::kSchemaError);
  bad = opts;
  bad.metric = "rmse";
  CHECK(code_of([&] { foreval::cmd_leaderboard(bad); }) == ErrorCode::kSchemaError);
  bad = opts;
  bad.summaries = {(dir / "nothing_*.jsonl").string()};
  CHECK(code_of([&] { foreval::cmd_leaderboard(bad); }) == ErrorCode::kDataError);

  // A lone model has nobody to rank against.
  foreval::write_summaries({all[0], all[1]}, dir / "solo.jsonl");
  bad = opts;
  bad.summaries = {(dir / "solo.jsonl").string()};
  CHECK(code_of([&] { foreval::cmd_leaderboard(bad); }) == ErrorCode::kDataError);
  fs::remove_all(dir);
}

#ifdef FOREVAL_BIN

namespace {

int run_command(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("the installed binary drives the full pipeline") {
  const std::string bin = FOREVAL_BIN;
  REQUIRE(fs::exists(bin));
  const fs::path dir = testsupport::fresh_temp_dir("cli_binary");
  // Noisy data keeps every baseline's error positive; ratio statistics
  // reject a model with an exactly zero error, as drift would have on the
  // noiseless line fixture.
  const fs::path bench = testsupport::write_mixed_benchmark(dir / "bench", 21, 4);

  CHECK(run_command(bin + " validate --benchmark " + bench.string()) == 0);
  CHECK(run_command(bin + " validate") != 0);  // missing required flag
  CHECK(run_command(bin + " validate --benchmark " + (dir / "absent.yaml").string()) == 1);

  CHECK(run_command(bin + " run-baselines --benchmark " + bench.string() + " --out-dir " +
                    (dir / "out").string() + " --dump-forecasts " + (dir / "dump").string()) ==
        0);
  CHECK(fs::exists(dir / "out" / "drift.jsonl"));
  CHECK(run_command(bin + " score --benchmark " + bench.string() + " --submission " +
                    (dir / "dump" / "naive_forecasts.jsonl").string() + " --out " +
                    (dir / "rescored.jsonl").string()) == 0);
  CHECK(read_bytes(dir / "rescored.jsonl") == read_bytes(dir / "out" / "naive.jsonl"));

  CHECK(run_command(bin + " leaderboard --summaries '" + (dir / "out").string() +
                    "/*.jsonl' --out-dir " + (dir / "lb").string() +
                    " --bootstrap-samples 50 --seed 3") == 0);
  CHECK(fs::exists(dir / "lb" / "leaderboard.md"));
  CHECK(fs::exists(dir / "lb" / "leaderboard.csv"));
  CHECK(fs::exists(dir / "lb" / "leaderboard.json"));
  fs::remove_all(dir);
}

#endif  // FOREVAL_BIN
