#ifndef FOREVAL_TESTS_SUPPORT_SYNTHETIC_HPP
#define FOREVAL_TESTS_SUPPORT_SYNTHETIC_HPP

#include <cstdint>
#include <filesystem>
#include <string>

namespace testsupport {

// Writes a deterministic benchmark of mixed-frequency sinusoid-plus-trend
// tasks (CSV datasets plus a benchmark YAML) under dir/, covering multiple
// dims, covariate roles, missing values, and metric overrides. Returns the
// benchmark file path.
std::filesystem::path write_mixed_benchmark(const std::filesystem::path& dir,
                                            std::uint64_t seed, int n_tasks = 20);

// Hourly single-series tasks: period-24 sinusoid with signal-to-noise ratio
// 10. Returns the benchmark file path.
std::filesystem::path write_seasonal_suite(const std::filesystem::path& dir,
                                           std::uint64_t seed, int n_tasks = 50);

// Creates and returns a unique directory under the system temp root.
std::filesystem::path fresh_temp_dir(const std::string& tag);

}  // namespace testsupport

#endif  // FOREVAL_TESTS_SUPPORT_SYNTHETIC_HPP
