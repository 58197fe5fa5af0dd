#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gripest/config.hpp"
#include "gripest/types.hpp"

namespace gripest::sim {

/// One piece of a driving script. Speed follows a cosine-smoothed ramp from
/// v_start to v_end; steering is a function of segment-local time.
struct Segment {
  std::string name;
  double duration = 0.0;
  double v_start = 0.0;
  double v_end = 0.0;
  std::function<double(double)> steer;  // road-wheel angle (rad); empty = straight
};

struct ManeuverScript {
  std::string name;
  std::vector<Segment> segments;

  double duration() const;
  double speed(double t) const;
  double accel(double t) const;  // d speed / dt
  double steer(double t) const;
  /// Start time of the first segment whose name starts with `prefix`, or -1.
  double segment_start(const std::string& prefix) const;
};

/// Road-wheel angle giving steady-state cornering with lateral acceleration
/// `ay` at speed `vx` under the truth tire model (load transfer from ax = 0).
/// Throws RangeError when the tires cannot produce `ay`.
double steady_state_steer(double vx, double ay, const TireParamSet& P, const VehicleConfig& cfg);

/// Slip x on the branch of Y through the origin with Y(x) = y.
/// Throws RangeError when |y| exceeds the branch peak.
double invert_magic_formula(double y, const PacejkaAxleParams& p);

/// Steering that follows the lateral-acceleration profile ay(tau)
/// quasi-statically at constant speed. |ay| must stay below `ay_abs_max`.
std::function<double(double)> steer_for_lateral_accel(std::function<double(double)> ay, double vx,
                                                      const TireParamSet& P,
                                                      const VehicleConfig& cfg, double ay_abs_max);

// Presets. Each begins with a standstill preamble.
ManeuverScript double_lane_change(double speed, const TireParamSet& P, const VehicleConfig& cfg);
ManeuverScript constant_radius(double speed, double ay, double hold, const TireParamSet& P,
                               const VehicleConfig& cfg);
ManeuverScript slalom(double speed, double ay, double period, int cycles, const TireParamSet& P,
                      const VehicleConfig& cfg);
ManeuverScript straight_brake_turn(const TireParamSet& P, const VehicleConfig& cfg);
ManeuverScript fitting_lap(const TireParamSet& P, const VehicleConfig& cfg);
ManeuverScript spin(const TireParamSet& P, const VehicleConfig& cfg);
ManeuverScript standstill(double duration);

inline constexpr double kPreamble = 2.0;  // s at rest before any script moves

}  // namespace gripest::sim
