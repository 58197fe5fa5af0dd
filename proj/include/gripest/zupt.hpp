#pragma once

#include <Eigen/Geometry>
#include <span>

#include "gripest/config.hpp"
#include "gripest/types.hpp"

namespace gripest {

/// Attitude at standstill. `gravity_body` is the specific force an ideal
/// accelerometer reads at rest, i.e. R_W^B * (0, 0, +g) with body z up:
/// a level vehicle gives (0, 0, +g).
struct AttitudeEstimate {
  Mat3 rotation_world_to_body = Mat3::Identity();
  Vec3 gravity_body = Vec3::Zero();
};

struct StandstillStatus {
  bool stationary = false;
  bool qualifying = false;  // both conditions currently hold
  double since = 0.0;       // start of the qualifying run, or time of the last violation
};

/// Advances the standstill detector by one sample. The vehicle becomes
/// stationary after speed < V_min and accel < A_min held for T_stop.
StandstillStatus update_standstill(const StandstillStatus& status, double speed_est,
                                   double accel_mag_comp, double t, const Thresholds& th);

/// 3-axis IMU sample consumed by the attitude filter.
struct ImuSample3 {
  double t = 0.0;
  Vec3 accel = Vec3::Zero();  // m/s^2
  Vec3 gyro = Vec3::Zero();   // rad/s
};

ImuSample3 to_imu3(const ImuSample& s, double g);

/// IMU-only Madgwick gradient-descent orientation filter.
class MadgwickFilter {
 public:
  explicit MadgwickFilter(double beta = 0.1) : beta_(beta) {}

  void update(const Vec3& gyro, const Vec3& accel, double dt);

  /// Orientation of the body frame in the world frame (body -> world).
  const Eigen::Quaterniond& orientation() const { return q_; }
  void set_orientation(const Eigen::Quaterniond& q) { q_ = q.normalized(); }
  void set_beta(double beta) { beta_ = beta; }

 private:
  double beta_;
  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

/// Converged attitude over a standstill window. The filter sweeps the window
/// repeatedly until the sweep-averaged gravity direction changes by less
/// than 1e-8. Throws InsufficientDataError if the window spans less than
/// `min_span` seconds.
AttitudeEstimate estimate_attitude(std::span<const ImuSample3> window, double min_span, double g,
                                   double beta = 0.1);

/// Removes the body-frame gravity components from measured accelerations.
Vec2 gravity_compensate(double ax_meas, double ay_meas, const AttitudeEstimate& att);

struct ZuptMeasurement {
  double ax_comp = 0.0;  // gravity-compensated longitudinal accel
  double ay_comp = 0.0;
  double r_meas = 0.0;
};

/// Whitened zero-velocity residual (vx, vy, r, bx - ax~, by - ay~, br - r^).
/// The Jacobian with respect to the state is the whitening diagonal.
Vec6 zv_residual(const VehicleState& x, const ZuptMeasurement& z, const Vec6& sigma_zv);
Mat6 zv_jacobian(const Vec6& sigma_zv);

}  // namespace gripest
