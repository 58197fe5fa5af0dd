#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace gripest {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Component order of the estimated state vector.
enum StateIndex : int { kVx = 0, kVy = 1, kR = 2, kBx = 3, kBy = 4, kBr = 5 };
inline constexpr int kStateDim = 6;
inline constexpr int kAxleParamDim = 6;
inline constexpr int kParamDim = 12;

/// Planar vehicle state at one timestamp: body velocities, yaw rate and IMU biases.
struct VehicleState {
  double t = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double r = 0.0;
  double bx = 0.0;
  double by = 0.0;
  double br = 0.0;

  Vec6 vec() const { return (Vec6() << vx, vy, r, bx, by, br).finished(); }
  static VehicleState from_vec(double t, const Vec6& v) {
    return {t, v[kVx], v[kVy], v[kR], v[kBx], v[kBy], v[kBr]};
  }
  bool finite() const;
};

/// Inputs driving the motion model: measured accelerations, yaw rate and
/// road-wheel steering angle.
struct InputSample {
  double t = 0.0;
  double ax_meas = 0.0;
  double ay_meas = 0.0;
  double r_meas = 0.0;
  double delta = 0.0;

  bool finite() const;
};

/// Pacejka macro-parameters of one axle. D is normalised by vertical load.
struct PacejkaAxleParams {
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;
  double E = 0.0;
  double Sh = 0.0;
  double Sv = 0.0;

  Vec6 vec() const { return (Vec6() << B, C, D, E, Sh, Sv).finished(); }
  static PacejkaAxleParams from_vec(const Vec6& v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }
};

struct TireParamSet {
  PacejkaAxleParams front;
  PacejkaAxleParams rear;

  Vec12 vec() const {
    Vec12 v;
    v << front.vec(), rear.vec();
    return v;
  }
  static TireParamSet from_vec(const Vec12& v) {
    return {PacejkaAxleParams::from_vec(v.head<6>()), PacejkaAxleParams::from_vec(v.tail<6>())};
  }
};

struct RadarPoint {
  double range = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
  double doppler = 0.0;
  double snr = 0.0;
};

struct RadarScan {
  int radar_id = 0;
  double t_capture = 0.0;
  double t_receive = 0.0;
  std::vector<RadarPoint> points;
};

/// Mounting of one radar: body-from-radar rotation, position in the body
/// frame and the Nyquist (maximum unambiguous) Doppler velocity.
struct RadarExtrinsics {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double nyquist = 26.5;
};

/// One IMU record. The planar channels feed the estimator; the optional
/// 3-axis channels are only used by the standstill attitude filter.
struct ImuSample {
  double t = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double r = 0.0;
  std::optional<double> az;
  std::optional<double> gx;
  std::optional<double> gy;
};

struct SteeringSample {
  double t = 0.0;
  double delta = 0.0;
};

struct ReferenceVelocity {
  double t = 0.0;
  double vx_ref = 0.0;
  double vy_ref = 0.0;
};

using SensorEvent = std::variant<ImuSample, SteeringSample, RadarScan, ReferenceVelocity>;

/// Time at which the event becomes available to the estimator.
double receive_time(const SensorEvent& event);

}  // namespace gripest
