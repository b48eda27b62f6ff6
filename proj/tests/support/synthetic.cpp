#include "synthetic.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "foreval/frequency.hpp"
#include "rng.hpp"

namespace testsupport {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 6.283185307179586;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct TaskPlan {
  std::string name;
  std::string freq;
  int n_series = 1;
  int n_dims = 1;
  int length = 120;
  int horizon = 8;
  int windows = 2;
  int trailing_known_rows = 0;
  bool with_known = false;
  bool with_past = false;
  bool with_static = false;
  double missing_rate = 0.0;
  std::string eval_metric;       // empty = default
  bool custom_levels = false;
  long initial_cutoff = -1;      // -1 = none
};

void write_csv_dataset(const fs::path& path, const TaskPlan& plan, TestRng& rng) {
  const foreval::Frequency freq = foreval::parse_frequency(plan.freq);
  const int m = foreval::default_seasonality(freq);
  const foreval::Timestamp start = foreval::parse_timestamp("2022-01-15 00:00");

  std::ofstream out(path);
  out << "id,timestamp";
  for (int d = 0; d < plan.n_dims; ++d) out << ",y" << d;
  if (plan.with_known) out << ",promo";
  if (plan.with_past) out << ",temperature";
  if (plan.with_static) out << ",region";
  out << "\n";

  const int total_rows = plan.length + plan.trailing_known_rows;
  for (int n = 0; n < plan.n_series; ++n) {
    const double level = rng.uniform(20.0, 80.0);
    const double slope = rng.uniform(-0.05, 0.05);
    const double amp = rng.uniform(5.0, 15.0);
    const double phase = rng.uniform(0.0, kTwoPi);
    const double noise = rng.uniform(0.5, 2.0);
    for (int t = 0; t < total_rows; ++t) {
      out << "s" << n << ","
          << foreval::format_timestamp(freq, foreval::advance(freq, start, t));
      for (int d = 0; d < plan.n_dims; ++d) {
        const bool trailing = t >= plan.length;
        // The last in-range row stays observed so T equals plan.length.
        const bool missing =
            trailing ||
            (plan.missing_rate > 0.0 && t < plan.length - 1 && rng.chance(plan.missing_rate));
        if (missing) {
          out << ",";
        } else {
          const double value = level + 10.0 * d + slope * t +
                               amp * std::sin(kTwoPi * t / m + phase + 0.7 * d) +
                               noise * rng.normal();
          out << "," << num(value);
        }
      }
      if (plan.with_known) out << "," << num(std::sin(kTwoPi * t / m));
      if (plan.with_past) {
        if (t >= plan.length) {
          out << ",";
        } else {
          out << "," << num(15.0 + 5.0 * std::sin(kTwoPi * t / m) + rng.normal());
        }
      }
      if (plan.with_static) out << ",r" << (n % 3);
      out << "\n";
    }
  }
}

void append_task_yaml(std::string& yaml, const TaskPlan& plan, const std::string& data_rel) {
  yaml += "  - task_name: " + plan.name + "\n";
  yaml += "    dataset:\n";
  yaml += "      data_path: " + data_rel + "\n";
  yaml += "      format: csv\n";
  yaml += "      id_column: id\n";
  yaml += "      timestamp_column: timestamp\n";
  yaml += "      frequency: \"" + plan.freq + "\"\n";
  yaml += "      target_columns: [";
  for (int d = 0; d < plan.n_dims; ++d) {
    if (d > 0) yaml += ", ";
    yaml += "y" + std::to_string(d);
  }
  yaml += "]\n";
  if (plan.with_known) yaml += "      known_dynamic_columns: [promo]\n";
  if (plan.with_past) yaml += "      past_dynamic_columns: [temperature]\n";
  if (plan.with_static) yaml += "      static_columns: [region]\n";
  yaml += "    horizon: " + std::to_string(plan.horizon) + "\n";
  yaml += "    num_windows: " + std::to_string(plan.windows) + "\n";
  if (plan.initial_cutoff >= 0) {
    yaml += "    initial_cutoff: " + std::to_string(plan.initial_cutoff) + "\n";
  }
  if (!plan.eval_metric.empty()) {
    yaml += "    eval_metric: " + plan.eval_metric + "\n";
  }
  if (plan.custom_levels) {
    yaml += "    quantile_levels: [0.1, 0.5, 0.9]\n";
  }
}

}  // namespace

fs::path write_mixed_benchmark(const fs::path& dir, std::uint64_t seed, int n_tasks) {
  static const char* kFreqs[] = {"H", "D", "W", "M", "30T"};
  fs::create_directories(dir / "data");
  TestRng rng(seed);
  std::string yaml = "name: mixed-synthetic\ntasks:\n";
  for (int i = 0; i < n_tasks; ++i) {
    TaskPlan plan;
    char name[32];
    std::snprintf(name, sizeof(name), "t%02d", i + 1);
    plan.name = name;
    plan.freq = kFreqs[i % 5];
    plan.n_series = 1 + i % 3;
    plan.n_dims = i % 4 == 3 ? 2 : 1;
    plan.horizon = rng.range(6, 12);
    plan.windows = rng.range(2, 3);
    const int m = foreval::default_seasonality(foreval::parse_frequency(plan.freq));
    const int needed = std::max((plan.windows + 2) * plan.horizon + 1,
                                m + plan.windows * plan.horizon + 2);
    plan.length = needed + rng.range(20, 60);
    plan.with_known = i % 4 == 1;
    plan.with_past = i % 3 == 2;
    plan.with_static = i % 2 == 1;
    plan.trailing_known_rows = plan.with_known && i % 8 == 1 ? plan.horizon : 0;
    plan.missing_rate = i % 5 == 2 ? 0.02 : 0.0;
    if (i % 7 == 6) plan.eval_metric = "wape";
    plan.custom_levels = i % 6 == 5;
    if (i == 4) {
      // Pinned first cutoff, sized so exactly num_windows windows fit.
      plan.windows = 2;
      plan.initial_cutoff = plan.length - 2 * plan.horizon;
    }

    const std::string data_rel = "data/" + plan.name + ".csv";
    write_csv_dataset(dir / data_rel, plan, rng);
    append_task_yaml(yaml, plan, data_rel);
  }
  const fs::path bench_path = dir / "benchmark.yaml";
  std::ofstream(bench_path) << yaml;
  return bench_path;
}

fs::path write_seasonal_suite(const fs::path& dir, std::uint64_t seed, int n_tasks) {
  fs::create_directories(dir / "data");
  TestRng rng(seed);
  std::string yaml = "name: seasonal-suite\ntasks:\n";
  for (int i = 0; i < n_tasks; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "s%02d", i + 1);
    const int length = 168;
    const double level = rng.uniform(40.0, 60.0);
    const double amp = rng.uniform(8.0, 16.0);
    const double phase = rng.uniform(0.0, kTwoPi);
    // SNR 10: noise variance = (amp^2 / 2) / 10.
    const double sigma = std::sqrt(amp * amp / 20.0);

    const std::string data_rel = std::string("data/") + name + ".csv";
    const foreval::Frequency freq = foreval::parse_frequency("H");
    const foreval::Timestamp start = foreval::parse_timestamp("2022-03-01 00:00");
    std::ofstream out(dir / data_rel);
    out << "id,timestamp,y\n";
    for (int t = 0; t < length; ++t) {
      const double value =
          level + amp * std::sin(kTwoPi * t / 24.0 + phase) + sigma * rng.normal();
      out << "a," << foreval::format_timestamp(freq, foreval::advance(freq, start, t)) << ","
          << num(value) << "\n";
    }

    yaml += std::string("  - task_name: ") + name + "\n";
    yaml += "    dataset:\n";
    yaml += "      data_path: " + data_rel + "\n";
    yaml += "      format: csv\n";
    yaml += "      id_column: id\n";
    yaml += "      timestamp_column: timestamp\n";
    yaml += "      frequency: \"H\"\n";
    yaml += "      target_columns: [y]\n";
    yaml += "    horizon: 24\n";
    yaml += "    num_windows: 2\n";
  }
  const fs::path bench_path = dir / "benchmark.yaml";
  std::ofstream(bench_path) << yaml;
  return bench_path;
}

fs::path fresh_temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("foreval_" + tag + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter.fetch_add(1)));
  fs::create_directories(p);
  return p;
}

}  // namespace testsupport
