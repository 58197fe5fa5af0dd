#include "gripest/zupt.hpp"

#include <cmath>

#include "gripest/errors.hpp"

namespace gripest {

StandstillStatus update_standstill(const StandstillStatus& status, double speed_est,
                                   double accel_mag_comp, double t, const Thresholds& th) {
  StandstillStatus next = status;
  if (speed_est < th.V_min && accel_mag_comp < th.A_min) {
    if (!status.qualifying) {
      next.qualifying = true;
      next.since = t;
    }
    next.stationary = (t - next.since) >= th.T_stop - 1e-9;
  } else {
    next.qualifying = false;
    next.stationary = false;
    next.since = t;
  }
  return next;
}

ImuSample3 to_imu3(const ImuSample& s, double g) {
  return {s.t, Vec3(s.ax, s.ay, s.az.value_or(g)), Vec3(s.gx.value_or(0.0), s.gy.value_or(0.0), s.r)};
}

void MadgwickFilter::update(const Vec3& gyro, const Vec3& accel, double dt) {
  const double q0 = q_.w(), q1 = q_.x(), q2 = q_.y(), q3 = q_.z();
  // Rate of change from the gyroscope: 0.5 * q (x) (0, w)
  Eigen::Vector4d q_dot(0.5 * (-q1 * gyro.x() - q2 * gyro.y() - q3 * gyro.z()),
                        0.5 * (q0 * gyro.x() + q2 * gyro.z() - q3 * gyro.y()),
                        0.5 * (q0 * gyro.y() - q1 * gyro.z() + q3 * gyro.x()),
                        0.5 * (q0 * gyro.z() + q1 * gyro.y() - q2 * gyro.x()));

  const double norm = accel.norm();
  if (norm > 0.0) {
    const Vec3 a = accel / norm;
    // Objective: predicted gravity direction in body minus measured direction.
    const Vec3 f(2.0 * (q1 * q3 - q0 * q2) - a.x(), 2.0 * (q0 * q1 + q2 * q3) - a.y(),
                 2.0 * (0.5 - q1 * q1 - q2 * q2) - a.z());
    Eigen::Matrix<double, 3, 4> J;
    J << -2.0 * q2, 2.0 * q3, -2.0 * q0, 2.0 * q1,  //
        2.0 * q1, 2.0 * q0, 2.0 * q3, 2.0 * q2,     //
        0.0, -4.0 * q1, -4.0 * q2, 0.0;
    Eigen::Vector4d step = J.transpose() * f;
    const double step_norm = step.norm();
    if (step_norm > 0.0) q_dot -= beta_ * step / step_norm;
  }
  Eigen::Vector4d q(q0, q1, q2, q3);
  q += q_dot * dt;
  q.normalize();
  q_ = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
}

AttitudeEstimate estimate_attitude(std::span<const ImuSample3> window, double min_span, double g,
                                   double beta) {
  if (window.size() < 2) throw InsufficientDataError("attitude window is empty");
  const double span = window.back().t - window.front().t;
  if (span < min_span - 1e-6) {
    throw InsufficientDataError("attitude window spans " + std::to_string(span) + " s, need " +
                                std::to_string(min_span) + " s");
  }

  MadgwickFilter filter(beta);
  const double first_dt = window[1].t - window[0].t;
  Vec3 previous = Vec3::Zero();
  Vec3 mean = Vec3::UnitZ();
  constexpr int kMaxSweeps = 200;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    // The normalised gradient step never shrinks on its own, so the filter
    // circles the solution at about beta*dt. Anneal once it has arrived.
    if (sweep >= 4) filter.set_beta(beta * std::pow(0.5, sweep - 3));
    Vec3 sum = Vec3::Zero();
    for (std::size_t i = 0; i < window.size(); ++i) {
      const double dt = i == 0 ? first_dt : window[i].t - window[i - 1].t;
      filter.update(window[i].gyro, window[i].accel, dt);
      const Mat3 body_to_world = filter.orientation().toRotationMatrix();
      sum += body_to_world.transpose().col(2);
    }
    mean = sum.normalized();
    if (sweep > 0 && (mean - previous).norm() < 1e-8) break;
    previous = mean;
  }

  AttitudeEstimate att;
  // Minimal rotation taking world up onto the averaged body-frame up direction.
  att.rotation_world_to_body =
      Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), mean).toRotationMatrix();
  att.gravity_body = att.rotation_world_to_body * Vec3(0.0, 0.0, g);
  return att;
}

Vec2 gravity_compensate(double ax_meas, double ay_meas, const AttitudeEstimate& att) {
  return {ax_meas - att.gravity_body.x(), ay_meas - att.gravity_body.y()};
}

Vec6 zv_residual(const VehicleState& x, const ZuptMeasurement& z, const Vec6& sigma_zv) {
  Vec6 raw;
  raw << x.vx, x.vy, x.r, x.bx - z.ax_comp, x.by - z.ay_comp, x.br - z.r_meas;
  return sigma_zv.cwiseSqrt().cwiseInverse().cwiseProduct(raw);
}

Mat6 zv_jacobian(const Vec6& sigma_zv) {
  return sigma_zv.cwiseSqrt().cwiseInverse().asDiagonal();
}

}  // namespace gripest
