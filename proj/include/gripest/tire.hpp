#pragma once

#include "gripest/config.hpp"
#include "gripest/types.hpp"

namespace gripest {

struct SlipAngles {
  double alpha_f = 0.0;
  double alpha_r = 0.0;
};

/// alpha_f = atan((vy + r lf) / vx) - delta, alpha_r = atan((vy - r lr) / vx).
/// Throws GateError when |vx| < V_Fy_min.
SlipAngles slip_angles(const VehicleState& x, double delta, const VehicleConfig& cfg);

/// Slip angles without the gate check, with derivatives w.r.t. (vx, vy, r).
struct SlipAngleJacobian {
  SlipAngles value;
  Vec3 d_alpha_f = Vec3::Zero();
  Vec3 d_alpha_r = Vec3::Zero();
};
SlipAngleJacobian slip_angles_jacobian(const VehicleState& x, double delta, const VehicleConfig& cfg);

struct VerticalLoads {
  double Fzf = 0.0;
  double Fzr = 0.0;
};

/// Static split, longitudinal load transfer from the measured ax and
/// aerodynamic downforce. Throws LoadDomainError if either load is <= 0.
VerticalLoads vertical_loads(const VehicleState& x, const InputSample& u, const VehicleConfig& cfg);

/// Y(x) = D sin(C atan(B z - E (B z - atan(B z)))) + Sv with z = x + Sh.
double magic_formula(double slip, const PacejkaAxleParams& p);

struct MagicFormulaEval {
  double value = 0.0;
  double d_slip = 0.0;
  Vec6 d_params = Vec6::Zero();  // w.r.t. (B, C, D, E, Sh, Sv)
};
MagicFormulaEval magic_formula_eval(double slip, const PacejkaAxleParams& p);

struct LateralForces {
  double Fyf = 0.0;
  double Fyr = 0.0;
};

/// Axle forces from load times the normalised curve. The curve is evaluated
/// at -alpha so that a positive steer produces a positive (leftward) force.
LateralForces model_lateral_forces(const VehicleState& x, const InputSample& u,
                                   const TireParamSet& P, const VehicleConfig& cfg);

/// Static-split inertial forces: front lr/L m ay / cos(delta), rear lf/L m ay.
/// Throws SteeringDomainError when cos(delta) <= cos(80 deg).
LateralForces measured_lateral_forces(double ay_meas, double delta, const VehicleConfig& cfg);

/// True when the lateral-force residual is defined and attached.
bool lateral_force_gate(const VehicleState& x, const VehicleConfig& cfg);

struct LateralForceResidual {
  Vec2 residual = Vec2::Zero();
  Eigen::Matrix<double, 2, 6> d_state = Eigen::Matrix<double, 2, 6>::Zero();
  Eigen::Matrix<double, 2, 12> d_params = Eigen::Matrix<double, 2, 12>::Zero();
};

/// Whitened (measured - model) axle forces with analytic Jacobians.
/// The caller is responsible for the gate.
LateralForceResidual lateral_force_residual(const VehicleState& x, const InputSample& u,
                                            const TireParamSet& P, const VehicleConfig& cfg);

/// Slope of the normalised curve at zero slip.
double cornering_stiffness(const PacejkaAxleParams& p);

struct AxleLateralState {
  double alpha_f = 0.0;
  double alpha_r = 0.0;
  double Fzf = 0.0;
  double Fzr = 0.0;
  double Fyf = 0.0;
  double Fyr = 0.0;
  double Fyf_meas = 0.0;
  double Fyr_meas = 0.0;
};

AxleLateralState axle_lateral_state(const VehicleState& x, const InputSample& u,
                                    const TireParamSet& P, const VehicleConfig& cfg);

}  // namespace gripest
