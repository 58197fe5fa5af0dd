#include "gripest/tire.hpp"

#include <cmath>
#include <numbers>

#include "gripest/errors.hpp"

namespace gripest {

namespace {

const double kMinCosSteer = std::cos(80.0 * std::numbers::pi / 180.0);

}  // namespace

SlipAngleJacobian slip_angles_jacobian(const VehicleState& x, double delta,
                                       const VehicleConfig& cfg) {
  SlipAngleJacobian j;
  const double qf = (x.vy + x.r * cfg.lf) / x.vx;
  const double qr = (x.vy - x.r * cfg.lr) / x.vx;
  j.value.alpha_f = std::atan(qf) - delta;
  j.value.alpha_r = std::atan(qr);
  const double sf = 1.0 / (1.0 + qf * qf);
  const double sr = 1.0 / (1.0 + qr * qr);
  j.d_alpha_f = sf * Vec3(-qf / x.vx, 1.0 / x.vx, cfg.lf / x.vx);
  j.d_alpha_r = sr * Vec3(-qr / x.vx, 1.0 / x.vx, -cfg.lr / x.vx);
  return j;
}

SlipAngles slip_angles(const VehicleState& x, double delta, const VehicleConfig& cfg) {
  if (!(std::abs(x.vx) >= cfg.thresholds.V_Fy_min)) {
    throw GateError("vx=" + std::to_string(x.vx) + " below the slip-angle gate");
  }
  return slip_angles_jacobian(x, delta, cfg).value;
}

VerticalLoads vertical_loads(const VehicleState& x, const InputSample& u,
                             const VehicleConfig& cfg) {
  const double k = cfg.m / cfg.wheelbase();
  const double q = 0.5 * cfg.rho * x.vx * x.vx * cfg.A;
  VerticalLoads fz;
  fz.Fzf = k * (cfg.g * cfg.lr - u.ax_meas * cfg.hg) + cfg.Czf * q;
  fz.Fzr = k * (cfg.g * cfg.lf + u.ax_meas * cfg.hg) + cfg.Czr * q;
  if (!(fz.Fzf > 0.0) || !(fz.Fzr > 0.0)) {
    throw LoadDomainError("non-positive vertical load (Fzf=" + std::to_string(fz.Fzf) +
                          ", Fzr=" + std::to_string(fz.Fzr) + ")");
  }
  return fz;
}

MagicFormulaEval magic_formula_eval(double slip, const PacejkaAxleParams& p) {
  const double z = slip + p.Sh;
  const double bz = p.B * z;
  const double atan_bz = std::atan(bz);
  const double phi = bz - p.E * (bz - atan_bz);
  const double theta = std::atan(phi);
  const double s = std::sin(p.C * theta);
  const double c = std::cos(p.C * theta);

  const double k = 1.0 - p.E + p.E / (1.0 + bz * bz);
  const double dy_dphi = p.D * c * p.C / (1.0 + phi * phi);

  MagicFormulaEval out;
  out.value = p.D * s + p.Sv;
  out.d_slip = dy_dphi * p.B * k;
  out.d_params << dy_dphi * z * k,     // B
      p.D * c * theta,                 // C
      s,                               // D
      -dy_dphi * (bz - atan_bz),       // E
      out.d_slip,                      // Sh
      1.0;                             // Sv
  return out;
}

double magic_formula(double slip, const PacejkaAxleParams& p) {
  return magic_formula_eval(slip, p).value;
}

LateralForces model_lateral_forces(const VehicleState& x, const InputSample& u,
                                   const TireParamSet& P, const VehicleConfig& cfg) {
  const SlipAngles a = slip_angles(x, u.delta, cfg);
  const VerticalLoads fz = vertical_loads(x, u, cfg);
  return {fz.Fzf * magic_formula(-a.alpha_f, P.front), fz.Fzr * magic_formula(-a.alpha_r, P.rear)};
}

LateralForces measured_lateral_forces(double ay_meas, double delta, const VehicleConfig& cfg) {
  const double cd = std::cos(delta);
  if (!(cd > kMinCosSteer)) {
    throw SteeringDomainError("steering angle " + std::to_string(delta) + " rad out of range");
  }
  const double L = cfg.wheelbase();
  return {cfg.lr / L * cfg.m * ay_meas / cd, cfg.lf / L * cfg.m * ay_meas};
}

bool lateral_force_gate(const VehicleState& x, const VehicleConfig& cfg) {
  const double v_min = cfg.thresholds.V_Fy_min;
  return std::hypot(x.vx, x.vy) > v_min && std::abs(x.vx) >= v_min;
}

LateralForceResidual lateral_force_residual(const VehicleState& x, const InputSample& u,
                                            const TireParamSet& P, const VehicleConfig& cfg) {
  const SlipAngleJacobian sa = slip_angles_jacobian(x, u.delta, cfg);
  const VerticalLoads fz = vertical_loads(x, u, cfg);
  const LateralForces meas = measured_lateral_forces(u.ay_meas, u.delta, cfg);
  const MagicFormulaEval yf = magic_formula_eval(-sa.value.alpha_f, P.front);
  const MagicFormulaEval yr = magic_formula_eval(-sa.value.alpha_r, P.rear);

  const double wf = 1.0 / std::sqrt(cfg.covariances.Sigma_Fy[0]);
  const double wr = 1.0 / std::sqrt(cfg.covariances.Sigma_Fy[1]);
  const double dq_dvx = cfg.rho * x.vx * cfg.A;  // d(0.5 rho vx^2 A) / dvx

  LateralForceResidual res;
  res.residual << wf * (meas.Fyf - fz.Fzf * yf.value), wr * (meas.Fyr - fz.Fzr * yr.value);

  // d Fy / d(vx, vy, r) = dFz * Y + Fz * Y' * (-d alpha)
  Vec3 dff = -fz.Fzf * yf.d_slip * sa.d_alpha_f;
  Vec3 dfr = -fz.Fzr * yr.d_slip * sa.d_alpha_r;
  dff[0] += cfg.Czf * dq_dvx * yf.value;
  dfr[0] += cfg.Czr * dq_dvx * yr.value;
  res.d_state.block<1, 3>(0, 0) = -wf * dff.transpose();
  res.d_state.block<1, 3>(1, 0) = -wr * dfr.transpose();
  res.d_params.block<1, 6>(0, 0) = -wf * fz.Fzf * yf.d_params.transpose();
  res.d_params.block<1, 6>(1, 6) = -wr * fz.Fzr * yr.d_params.transpose();
  return res;
}

double cornering_stiffness(const PacejkaAxleParams& p) { return p.B * p.C * p.D; }

AxleLateralState axle_lateral_state(const VehicleState& x, const InputSample& u,
                                    const TireParamSet& P, const VehicleConfig& cfg) {
  AxleLateralState s;
  const SlipAngles a = slip_angles(x, u.delta, cfg);
  const VerticalLoads fz = vertical_loads(x, u, cfg);
  const LateralForces meas = measured_lateral_forces(u.ay_meas, u.delta, cfg);
  s.alpha_f = a.alpha_f;
  s.alpha_r = a.alpha_r;
  s.Fzf = fz.Fzf;
  s.Fzr = fz.Fzr;
  s.Fyf = fz.Fzf * magic_formula(-a.alpha_f, P.front);
  s.Fyr = fz.Fzr * magic_formula(-a.alpha_r, P.rear);
  s.Fyf_meas = meas.Fyf;
  s.Fyr_meas = meas.Fyr;
  return s;
}

}  // namespace gripest
