#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "foreval/commands.hpp"
#include "foreval/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Rolling-origin forecast evaluation harness"};
  app.require_subcommand(1);

  foreval::ValidateOptions vopts;
  CLI::App* validate =
      app.add_subcommand("validate", "Check a benchmark's datasets and evaluation windows");
  validate->add_option("--benchmark", vopts.benchmark_path, "Benchmark YAML file")->required();

  foreval::RunBaselinesOptions bopts;
  CLI::App* baselines =
      app.add_subcommand("run-baselines", "Evaluate the built-in baselines on a benchmark");
  baselines->add_option("--benchmark", bopts.benchmark_path, "Benchmark YAML file")->required();
  baselines->add_option("--out-dir", bopts.out_dir,
                        "Directory for per-baseline summaries (default .)");
  baselines->add_option("--baselines", bopts.baselines,
                        "Baselines to run: seasonal_naive, naive, drift (default all)")
      ->delimiter(',');
  baselines->add_option("--dump-forecasts", bopts.dump_forecasts_dir,
                        "Also write raw forecasts in the submission format to this directory");
  baselines->add_option("--jobs", bopts.jobs, "Tasks evaluated concurrently (default 1)");

  foreval::ScoreOptions sopts;
  CLI::App* score = app.add_subcommand("score", "Score a forecast submission");
  score->add_option("--benchmark", sopts.benchmark_path, "Benchmark YAML file")->required();
  score->add_option("--submission", sopts.submission_path, "Submission JSONL file")->required();
  score->add_option("--out", sopts.out_path, "Summaries output path (default summaries.jsonl)");

  foreval::LeaderboardOptions lopts;
  CLI::App* leaderboard =
      app.add_subcommand("leaderboard", "Aggregate summaries into a leaderboard");
  leaderboard->add_option("--summaries", lopts.summaries, "Summary files or glob patterns")
      ->required();
  leaderboard->add_option("--out-dir", lopts.out_dir, "Output directory (default .)");
  leaderboard->add_option("--metric", lopts.metric,
                          "mase|sql|wql|wape (default: each task's eval metric)");
  leaderboard->add_option("--baseline", lopts.baseline,
                          "Baseline model name (default seasonal_naive)");
  leaderboard->add_option("--leakage-reference", lopts.leakage_reference,
                          "Model whose score replaces leaked results (default: the baseline)");
  leaderboard->add_option("--bootstrap-samples", lopts.bootstrap_samples,
                          "Bootstrap replicates (default 1000)");
  leaderboard->add_option("--alpha", lopts.alpha, "Interval tail mass (default 0.05)");
  leaderboard->add_option("--seed", lopts.seed, "Bootstrap seed (default 0)");
  leaderboard->add_option("--format", lopts.formats, "Outputs to write: md,csv,json")
      ->delimiter(',');
  leaderboard->add_flag("--marginal-ci", lopts.marginal_ci,
                        "Add bootstrap intervals to the marginal statistics");
  leaderboard->add_option("--jobs", lopts.jobs, "Bootstrap worker threads (default 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return foreval::cmd_validate(vopts);
    if (baselines->parsed()) return foreval::cmd_run_baselines(bopts);
    if (score->parsed()) return foreval::cmd_score(sopts);
    return foreval::cmd_leaderboard(lopts);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
