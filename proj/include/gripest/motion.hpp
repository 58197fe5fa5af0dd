#pragma once

#include "gripest/types.hpp"

namespace gripest {

/// Forward-Euler step of the curvilinear rigid-body model.
///
/// vx and vy integrate bias-corrected accelerations plus the Coriolis
/// coupling (+r*vy, -r*vx). The next yaw rate is the previous gyro sample
/// minus its bias, and the biases are carried unchanged.
VehicleState state_transition(const VehicleState& x_prev, const InputSample& u_prev, double dt);

/// d state_transition / d x_prev.
Mat6 transition_jacobian(const VehicleState& x_prev, double dt);

struct ProcessResidual {
  Vec6 residual;
  Mat6 d_prev;  // d residual / d x_prev
  Mat6 d_next;  // d residual / d x_next
};

/// Whitened process residual x_next - f(x_prev, u_prev). `sigma_w` holds the
/// per-component variances for an interval of `dt_nominal`; they scale
/// linearly with the actual interval length. Throws WindowOrderError for dt <= 0.
ProcessResidual process_residual(const VehicleState& x_next, const VehicleState& x_prev,
                                 const InputSample& u_prev, double dt, const Vec6& sigma_w,
                                 double dt_nominal);

}  // namespace gripest
