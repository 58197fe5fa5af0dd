#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gripest/config.hpp"
#include "gripest/output.hpp"
#include "gripest/types.hpp"

namespace gripest {

struct ChannelError {
  double max_abs = 0.0;
  double rmse = 0.0;
  int count = 0;
};

struct TimingStats {
  double mean = 0.0;
  double p50 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  int count = 0;
};

TimingStats timing_stats(std::vector<double> samples);

struct MetricsReport {
  ChannelError vx, vy, alpha_f, alpha_r, Fyf, Fyr;
  int aligned_rows = 0;
  int gated_rows = 0;
  std::optional<double> convergence_time;  // s
  std::optional<TimingStats> solve_time;
};

/// Truth trajectory as written by the simulator.
struct TruthRecord {
  double t = 0.0;
  double vx = 0.0, vy = 0.0, r = 0.0;
  double ax = 0.0, ay = 0.0, delta = 0.0;
  double Fyf = 0.0, Fyr = 0.0;
  double alpha_f = 0.0, alpha_r = 0.0;
};

inline constexpr const char* kTruthCsvHeader = "t,vx,vy,r,ax,ay,delta,Fyf,Fyr,alpha_f,alpha_r";

std::vector<TruthRecord> read_truth_csv(std::istream& in);
void write_truth_csv(std::ostream& out, const std::vector<TruthRecord>& rows);

/// Aligns each estimate row with the nearest truth row within 5 ms.
/// Velocity errors use every aligned row; slip and force errors only rows
/// where the truth speed exceeds V_Fy_min and the estimate is present.
/// With `truth_params`, the convergence time is the first time after which
/// both estimated BCD stay within 5 % of the truth values.
/// Throws AlignmentError when no row aligns.
MetricsReport compute_metrics(const std::vector<EstimateRecord>& estimate,
                              const std::vector<TruthRecord>& truth, const VehicleConfig& cfg,
                              const std::optional<TireParamSet>& truth_params = std::nullopt);

/// RMSE of Y_est - Y_truth over slip in [-slip_max, slip_max], divided by
/// D_truth.
double normalized_curve_rmse(const PacejkaAxleParams& est, const PacejkaAxleParams& truth,
                             double slip_max, int samples = 201);

std::string metrics_to_json(const MetricsReport& m);
std::string metrics_table(const MetricsReport& m);

}  // namespace gripest
