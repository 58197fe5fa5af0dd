#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gripest/config.hpp"
#include "gripest/metrics.hpp"
#include "gripest/mhe/estimator.hpp"

namespace gripest::cli {

struct SimOptions {
  std::string scenario;
  std::optional<std::string> config_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::optional<double> outlier_fraction;
};

struct SimFiles {
  std::string log;
  std::string truth;
  std::string manifest;
  std::string config;  // estimator configuration for this scenario
};

/// Writes <out>/<scenario>.jsonl, <scenario>_truth.csv, <scenario>_manifest.json
/// and <scenario>_config.json.
SimFiles cmd_sim(const SimOptions& opt);

struct EstimateSummary {
  std::size_t rows = 0;
  mhe::EstimatorStats stats;
  TimingStats solve_time;
  int max_iterations = 0;
  std::vector<std::string> warnings;
  std::vector<double> final_costs;
};

/// Replays a log in receive order and writes the estimate CSV.
EstimateSummary cmd_estimate(const std::string& log_path, const std::optional<std::string>& config_path,
                             const std::string& out_csv);

/// Runs the estimator over already decoded events.
mhe::Estimator run_estimator(const std::vector<SensorEvent>& log, const VehicleConfig& cfg);

/// `params_manifest` is a simulator manifest carrying the truth parameters.
MetricsReport cmd_metrics(const std::string& estimate_csv, const std::string& truth_csv,
                          const std::optional<std::string>& config_path,
                          const std::optional<std::string>& params_manifest);

struct BenchReport {
  int repetitions = 0;
  TimingStats per_solve;
  TimingStats per_tick;
  int max_iterations = 0;
  bool costs_identical = true;
};

/// Re-runs the full replay `repetitions` times. Throws UsageError for 0.
BenchReport cmd_bench(const std::string& log_path, const std::optional<std::string>& config_path,
                      int repetitions);

std::string summary_text(const EstimateSummary& s);
std::string bench_text(const BenchReport& b);

/// Command-line entry point; returns the process exit code
/// (0 ok, 1 usage, 2 I/O or input format, 3 numeric or estimation failure).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// FNV-1a 64-bit hash, hex encoded.
std::string fnv1a_hex(const std::string& data);

}  // namespace gripest::cli
