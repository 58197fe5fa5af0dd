#pragma once

#include <vector>

#include "gripest/config.hpp"
#include "gripest/metrics.hpp"
#include "gripest/sim/maneuver.hpp"
#include "gripest/types.hpp"

namespace gripest::sim {

struct TruthState {
  double t = 0.0;
  double vx = 0.0, vy = 0.0, r = 0.0;
  double ax = 0.0, ay = 0.0;  // body-frame specific force an ideal IMU reads
  double delta = 0.0;
  double Fyf = 0.0, Fyr = 0.0;
  double alpha_f = 0.0, alpha_r = 0.0;

  VehicleState vehicle_state() const { return {t, vx, vy, r, 0.0, 0.0, 0.0}; }
  TruthRecord record() const { return {t, vx, vy, r, ax, ay, delta, Fyf, Fyr, alpha_f, alpha_r}; }
};

/// Single-track truth model. vx follows the script; vy and r obey
///   m (vy' + r vx) = Fyf cos(delta) + Fyr,  Iz r' = lf Fyf cos(delta) - lr Fyr
/// with forces from the same load, slip and tire formulas the estimator uses.
/// Integrated with RK4 at dt_sim. Below 1 m/s vy and r are held at zero.
/// Returns one state per step, starting at t = 0.
/// Throws TruthDivergenceError when |vy| exceeds vx.
std::vector<TruthState> simulate_truth(const ManeuverScript& script, const TireParamSet& P_truth,
                                       const VehicleConfig& cfg, double dt_sim = 1e-3);

inline constexpr double kTruthHoldSpeed = 1.0;

}  // namespace gripest::sim
