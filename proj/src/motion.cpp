#include "gripest/motion.hpp"

#include <cmath>

#include "gripest/errors.hpp"

namespace gripest {

VehicleState state_transition(const VehicleState& x, const InputSample& u, double dt) {
  if (!(dt > 0.0)) throw WindowOrderError("state_transition requires dt > 0");
  if (!x.finite() || !u.finite() || !std::isfinite(dt)) {
    throw NumericError("state_transition received a non-finite value");
  }
  VehicleState next = x;
  next.t = x.t + dt;
  next.vx = x.vx + ((u.ax_meas - x.bx) + x.r * x.vy) * dt;
  next.vy = x.vy + ((u.ay_meas - x.by) - x.r * x.vx) * dt;
  next.r = u.r_meas - x.br;
  return next;
}

Mat6 transition_jacobian(const VehicleState& x, double dt) {
  Mat6 F = Mat6::Zero();
  F(kVx, kVx) = 1.0;
  F(kVx, kVy) = x.r * dt;
  F(kVx, kR) = x.vy * dt;
  F(kVx, kBx) = -dt;
  F(kVy, kVx) = -x.r * dt;
  F(kVy, kVy) = 1.0;
  F(kVy, kR) = -x.vx * dt;
  F(kVy, kBy) = -dt;
  F(kR, kBr) = -1.0;
  F(kBx, kBx) = 1.0;
  F(kBy, kBy) = 1.0;
  F(kBr, kBr) = 1.0;
  return F;
}

ProcessResidual process_residual(const VehicleState& x_next, const VehicleState& x_prev,
                                 const InputSample& u_prev, double dt, const Vec6& sigma_w,
                                 double dt_nominal) {
  if (!(dt > 0.0)) throw WindowOrderError("process residual needs consecutive states with dt > 0");
  const VehicleState predicted = state_transition(x_prev, u_prev, dt);
  const Vec6 weight = (sigma_w * (dt / dt_nominal)).cwiseSqrt().cwiseInverse();
  ProcessResidual out;
  out.residual = weight.cwiseProduct(x_next.vec() - predicted.vec());
  out.d_next = weight.asDiagonal();
  out.d_prev = -(weight.asDiagonal() * transition_jacobian(x_prev, dt));
  return out;
}

}  // namespace gripest
