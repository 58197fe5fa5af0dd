#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "gripest/config.hpp"
#include "gripest/mhe/solver.hpp"
#include "gripest/mhe/window.hpp"
#include "gripest/output.hpp"
#include "gripest/zupt.hpp"

namespace gripest::mhe {

struct EstimatorStats {
  int imu_samples = 0;
  int scans = 0;
  int stale_events = 0;  // including stale scans
  int stale_scans = 0;
  int accepted_points = 0;
  int rejected_snr = 0;
  int rejected_innovation = 0;
  int rejected_alias = 0;
  int solves = 0;
  int watchdog_solves = 0;
  int inserted_states = 0;
  int standstill_periods = 0;
};

/// Event-driven pipeline around one sliding window: builds the 10 ms state
/// grid from IMU time, binds radar scans at their capture time, attaches
/// ZUPT residuals at standstill and solves whenever a scan contributes at
/// least one Doppler factor.
///
/// An output row for a grid state is emitted when the next grid state is
/// created, so it reflects every scan received up to then.
class Estimator {
 public:
  explicit Estimator(const VehicleConfig& cfg);

  /// Adds one event to the window. Returns true when the event should
  /// trigger a solve. Throws StaleEventError for events older than the window.
  bool attach(const SensorEvent& event);

  /// attach() followed by the solve it triggers (or the watchdog solve).
  /// Stale events are dropped and counted.
  void process(const SensorEvent& event);

  /// Emits the row of the newest grid state. Call once after the last event.
  void finish();

  /// Solves the current window immediately.
  void solve_now(bool watchdog = false);

  const SlidingWindow& window() const { return window_; }
  const TireParamSet& params() const { return params_; }
  const std::vector<OutputRow>& rows() const { return rows_; }
  const std::vector<SolveReport>& reports() const { return reports_; }
  const EstimatorStats& stats() const { return stats_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const StandstillStatus& standstill() const { return standstill_; }
  const std::optional<AttitudeEstimate>& attitude() const { return attitude_; }
  const VehicleConfig& config() const { return cfg_; }

 private:
  void on_imu(const ImuSample& s);
  void on_steering(const SteeringSample& s);
  bool on_radar(const RadarScan& scan);
  void push_grid_state(double t);
  void emit_row(double t);
  void update_attitude(double t);
  double detector_speed() const;
  void warn_once(const std::string& w);

  VehicleConfig cfg_;
  SlidingWindow window_;
  TireParamSet params_;
  std::vector<OutputRow> rows_;
  std::vector<SolveReport> reports_;
  std::vector<std::string> warnings_;
  EstimatorStats stats_;

  std::optional<double> grid_origin_;
  long grid_index_ = 0;  // index of the newest grid state
  std::optional<double> last_grid_t_;
  double now_ = 0.0;
  double last_solve_t_ = 0.0;
  bool has_fix_ = false;
  double radar_speed_ = -1.0;  // < 0 until the first scan

  StandstillStatus standstill_;
  bool standstill_seen_ = false;
  std::deque<ImuSample3> attitude_buffer_;
  std::optional<ImuSample3> accel_lp_;  // low-passed input of the standstill detector
  std::optional<AttitudeEstimate> attitude_;
  double attitude_t_ = 0.0;
};

}  // namespace gripest::mhe
