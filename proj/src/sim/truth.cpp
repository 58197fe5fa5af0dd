#include "gripest/sim/truth.hpp"

#include <cmath>

#include "gripest/errors.hpp"
#include "gripest/tire.hpp"

namespace gripest::sim {

namespace {

struct Forces {
  double Fyf = 0.0, Fyr = 0.0;
  double alpha_f = 0.0, alpha_r = 0.0;
  double ay = 0.0;  // (Fyf cos delta + Fyr) / m
};

Forces axle_forces(double vx, double vy, double r, double ax, double delta,
                   const TireParamSet& P, const VehicleConfig& cfg) {
  Forces f;
  if (vx < kTruthHoldSpeed) return f;
  VehicleState x;
  x.vx = vx;
  x.vy = vy;
  x.r = r;
  InputSample u;
  u.ax_meas = ax;
  u.delta = delta;
  const SlipAngles a = slip_angles_jacobian(x, delta, cfg).value;
  const VerticalLoads fz = vertical_loads(x, u, cfg);
  f.alpha_f = a.alpha_f;
  f.alpha_r = a.alpha_r;
  f.Fyf = fz.Fzf * magic_formula(-a.alpha_f, P.front);
  f.Fyr = fz.Fzr * magic_formula(-a.alpha_r, P.rear);
  f.ay = (f.Fyf * std::cos(delta) + f.Fyr) / cfg.m;
  return f;
}

}  // namespace

std::vector<TruthState> simulate_truth(const ManeuverScript& script, const TireParamSet& P,
                                       const VehicleConfig& cfg, double dt_sim) {
  if (!(dt_sim > 0.0) || dt_sim > 1e-3 + 1e-12) {
    throw RangeError("truth step must be in (0, 1 ms]");
  }
  const auto steps = static_cast<long>(std::llround(script.duration() / dt_sim));
  std::vector<TruthState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);

  // Lateral dynamics (vy, r) at time t. Body ax uses the current r, vy.
  auto deriv = [&](double t, double vy, double r, double& dvy, double& dr) {
    const double vx = script.speed(t);
    if (vx < kTruthHoldSpeed) {
      dvy = 0.0;
      dr = 0.0;
      return;
    }
    const double delta = script.steer(t);
    const double ax = script.accel(t) - r * vy;
    const Forces f = axle_forces(vx, vy, r, ax, delta, P, cfg);
    dvy = f.ay - r * vx;
    dr = (cfg.lf * f.Fyf * std::cos(delta) - cfg.lr * f.Fyr) / cfg.Iz;
  };

  double vy = 0.0, r = 0.0;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt_sim;
    const double vx = script.speed(t);
    if (vx < kTruthHoldSpeed) {
      vy = 0.0;
      r = 0.0;
    }
    TruthState s;
    s.t = t;
    s.vx = vx;
    s.vy = vy;
    s.r = r;
    s.delta = script.steer(t);
    s.ax = script.accel(t) - r * vy;
    const Forces f = axle_forces(vx, vy, r, s.ax, s.delta, P, cfg);
    s.Fyf = f.Fyf;
    s.Fyr = f.Fyr;
    s.alpha_f = f.alpha_f;
    s.alpha_r = f.alpha_r;
    s.ay = f.ay;
    if (!std::isfinite(vy) || !std::isfinite(r) || std::abs(vy) > std::max(vx, kTruthHoldSpeed)) {
      throw TruthDivergenceError(t);
    }
    out.push_back(s);
    if (k == steps) break;

    double k1v, k1r, k2v, k2r, k3v, k3r, k4v, k4r;
    const double h = dt_sim;
    deriv(t, vy, r, k1v, k1r);
    deriv(t + 0.5 * h, vy + 0.5 * h * k1v, r + 0.5 * h * k1r, k2v, k2r);
    deriv(t + 0.5 * h, vy + 0.5 * h * k2v, r + 0.5 * h * k2r, k3v, k3r);
    deriv(t + h, vy + h * k3v, r + h * k3r, k4v, k4r);
    vy += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
  }
  return out;
}

}  // namespace gripest::sim
