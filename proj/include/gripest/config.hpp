#pragma once

#include <string>
#include <vector>

#include "gripest/types.hpp"

namespace gripest {

struct Thresholds {
  double V_min = 0.5;         // standstill speed bound (m/s)
  double A_min = 0.2;         // standstill accel bound (m/s^2)
  double T_stop = 1.0;        // standstill duration (s)
  double snr_min = 10.0;      // dB
  double dV_r_max = 3.0;      // Doppler innovation gate (m/s)
  double V_Fy_min = 5.0;      // lateral-force gate (m/s)
  double dTw = 0.150;         // horizon length (s)
  double dt = 0.010;          // state spacing (s)
  double latency_max = 0.25;  // accepted t_receive - t_capture (s)
  double watchdog = 0.100;    // radar silence before a fallback solve (s)
};

/// Diagonal covariances, stored as variances.
struct Covariances {
  Vec6 Sigma_x0 = (Vec6() << 0.05 * 0.05, 0.05 * 0.05, 0.01 * 0.01, 0.01 * 0.01, 0.01 * 0.01,
                   2e-4 * 2e-4)
                      .finished();
  /// Re-applied at every solve around the previous estimate, so this sets
  /// how fast the parameters may move rather than how well they are known.
  Vec12 Sigma_P = (Vec12() << 2.5e-3, 2.5e-5, 1e-6, 2.5e-4, 1e-10, 1e-8,  //
                   2.5e-3, 2.5e-5, 1e-6, 2.5e-4, 1e-10, 1e-8)
                      .finished();
  /// Process noise per nominal dt; scaled linearly with the actual interval.
  Vec6 Sigma_w = (Vec6() << 0.005 * 0.005, 0.005 * 0.005, 1e-3 * 1e-3, 1e-4 * 1e-4, 1e-4 * 1e-4,
                  1e-5 * 1e-5)
                     .finished();
  Vec6 Sigma_zv =
      (Vec6() << 0.01 * 0.01, 0.01 * 0.01, 1e-3 * 1e-3, 0.05 * 0.05, 0.05 * 0.05, 1e-3 * 1e-3)
          .finished();
  double sigma_doppler = 0.25;  // std (m/s)
  Vec2 Sigma_Fy = Vec2(600.0 * 600.0, 600.0 * 600.0);
  double cauchy_scale = 1.0;
};

struct ParamBounds {
  Vec6 P_min = (Vec6() << 1.0, 0.5, 0.5, -5.0, -0.1, -0.5).finished();
  Vec6 P_max = (Vec6() << 40.0, 4.0, 4.0, 1.0, 0.1, 0.5).finished();
};

struct FieldOfView {
  double azimuth_max = 1.0472;    // rad, symmetric about boresight
  double elevation_max = 0.2618;  // rad
};

struct SolverSettings {
  int max_iterations = 3;
  double max_time = 0.008;  // s
  double lm_lambda_init = 1e-4;
  double gradient_tol = 1e-10;
  double step_tol = 1e-10;
};

struct VehicleConfig {
  double m = 800.0;
  double lf = 1.7;
  double lr = 1.5;
  double hg = 0.3;
  double g = 9.81;
  double rho = 1.2;
  double A = 1.0;
  double Czf = 1.2;
  double Czr = 1.5;
  double Iz = 1000.0;  // truth simulator only
  double steering_ratio = 1.0;
  double delta_max = 0.4;  // rad, road-wheel
  std::vector<RadarExtrinsics> radars;
  FieldOfView fov;
  Thresholds thresholds;
  Covariances covariances;
  ParamBounds bounds;
  TireParamSet tire_init;
  Vec3 bias_init = Vec3::Zero();
  SolverSettings solver;

  double wheelbase() const { return lf + lr; }
};

/// Nominal three-radar race-car configuration (front + two lateral units).
VehicleConfig default_config();

/// Tire parameters used as simulator truth and default estimator prior.
TireParamSet nominal_tire_params();

/// Checks every invariant and re-orthonormalises rotations that are within
/// 1e-6 of orthonormal. Throws ConfigError naming the first bad field.
VehicleConfig validate_config(VehicleConfig cfg);

/// Loads a JSON configuration. Absent keys keep their default value;
/// unknown keys are rejected. The result is validated.
VehicleConfig load_config(const std::string& path);
VehicleConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const VehicleConfig& cfg);

/// Rotation about the body z-axis (radar yaw mounting).
Mat3 yaw_rotation(double yaw);

}  // namespace gripest
