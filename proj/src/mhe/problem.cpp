#include "gripest/mhe/problem.hpp"

#include <cmath>

#include "gripest/errors.hpp"
#include "gripest/motion.hpp"
#include "gripest/radar.hpp"
#include "gripest/tire.hpp"
#include "gripest/zupt.hpp"

namespace gripest::mhe {

const char* to_string(FactorClass c) {
  switch (c) {
    case FactorClass::PriorState:
      return "prior_state";
    case FactorClass::PriorParams:
      return "prior_params";
    case FactorClass::Process:
      return "process";
    case FactorClass::Zupt:
      return "zupt";
    case FactorClass::Doppler:
      return "doppler";
    case FactorClass::LateralForce:
      return "lateral_force";
  }
  return "unknown";
}

double CostBreakdown::total() const {
  double sum = 0.0;
  for (double c : by_class) sum += c;
  return sum;
}

double cauchy_loss(double s, double scale) {
  const double c2 = scale * scale;
  return c2 * std::log1p(s / c2);
}

double cauchy_weight(double s, double scale) { return 1.0 / (1.0 + s / (scale * scale)); }

WindowProblem::WindowProblem(const SlidingWindow& window, const VehicleConfig& cfg,
                             bool use_lateral_force)
    : window_(window), cfg_(cfg), fy_gate_(window.size(), 0) {
  if (!use_lateral_force) return;
  for (std::size_t i = 0; i < window.size(); ++i) {
    const WindowNode& n = window.node(i);
    if (!gripest::lateral_force_gate(n.x, cfg)) continue;
    try {
      vertical_loads(n.x, n.u, cfg);
      measured_lateral_forces(n.u.ay_meas, n.u.delta, cfg);
    } catch (const Error&) {
      continue;
    }
    fy_gate_[i] = 1;
  }
}

std::vector<Vec6> WindowProblem::initial_states() const {
  std::vector<Vec6> X(window_.size());
  for (std::size_t i = 0; i < X.size(); ++i) X[i] = window_.node(i).x.vec();
  return X;
}

CostBreakdown WindowProblem::evaluate(const std::vector<Vec6>& X, const Vec12& P) const {
  return accumulate(X, P, nullptr);
}

CostBreakdown WindowProblem::linearize(const std::vector<Vec6>& X, const Vec12& P,
                                       BlockArrowSystem& sys) const {
  sys.reset(X.size());
  return accumulate(X, P, &sys);
}

CostBreakdown WindowProblem::accumulate(const std::vector<Vec6>& X, const Vec12& P,
                                        BlockArrowSystem* sys) const {
  CostBreakdown cost;
  const std::size_t n = X.size();
  const auto& cov = cfg_.covariances;
  auto state = [&](std::size_t i) { return VehicleState::from_vec(window_.node(i).t(), X[i]); };

  // Prior on the oldest state.
  {
    const Vec6 w = window_.prior_state_variance().cwiseSqrt().cwiseInverse();
    const Vec6 r = w.cwiseProduct(X[0] - window_.prior_state().vec());
    cost[FactorClass::PriorState] += 0.5 * r.squaredNorm();
    if (sys) {
      sys->diag[0].diagonal() += w.cwiseProduct(w);
      sys->g_state[0] += w.cwiseProduct(r);
    }
  }

  // Prior on the tire parameters.
  {
    const Vec12 w = window_.prior_params_variance().cwiseSqrt().cwiseInverse();
    const Vec12 r = w.cwiseProduct(P - window_.prior_params().vec());
    cost[FactorClass::PriorParams] += 0.5 * r.squaredNorm();
    if (sys) {
      sys->corner.diagonal() += w.cwiseProduct(w);
      sys->g_param += w.cwiseProduct(r);
    }
  }

  // Process model between consecutive states.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dt = window_.node(i + 1).t() - window_.node(i).t();
    const ProcessResidual pr = process_residual(state(i + 1), state(i), window_.interval_input(i),
                                                dt, cov.Sigma_w, cfg_.thresholds.dt);
    cost[FactorClass::Process] += 0.5 * pr.residual.squaredNorm();
    if (sys) {
      sys->diag[i].noalias() += pr.d_prev.transpose() * pr.d_prev;
      sys->diag[i + 1].noalias() += pr.d_next.transpose() * pr.d_next;
      sys->upper[i].noalias() += pr.d_prev.transpose() * pr.d_next;
      sys->g_state[i].noalias() += pr.d_prev.transpose() * pr.residual;
      sys->g_state[i + 1].noalias() += pr.d_next.transpose() * pr.residual;
    }
  }

  const Mat6 zv_jac = zv_jacobian(cov.Sigma_zv);
  for (std::size_t i = 0; i < n; ++i) {
    const WindowNode& node = window_.node(i);
    const VehicleState x = state(i);

    if (node.zupt) {
      const Vec6 r = zv_residual(x, *node.zupt, cov.Sigma_zv);
      cost[FactorClass::Zupt] += 0.5 * r.squaredNorm();
      if (sys) {
        sys->diag[i].noalias() += zv_jac.transpose() * zv_jac;
        sys->g_state[i].noalias() += zv_jac.transpose() * r;
      }
    }

    for (const DopplerFactor& f : node.doppler) {
      const RadarExtrinsics& ext = cfg_.radars[static_cast<std::size_t>(f.radar_id)];
      const DopplerResidual dr = doppler_residual(f, x, ext);
      const double s = dr.residual * dr.residual;
      cost[FactorClass::Doppler] += 0.5 * cauchy_loss(s, cov.cauchy_scale);
      if (sys) {
        const double w = cauchy_weight(s, cov.cauchy_scale);
        sys->diag[i].topLeftCorner<3, 3>().noalias() += w * dr.d_state * dr.d_state.transpose();
        sys->g_state[i].head<3>() += w * dr.residual * dr.d_state;
      }
    }

    if (fy_gate_[i]) {
      const LateralForceResidual fr =
          lateral_force_residual(x, node.u, TireParamSet::from_vec(P), cfg_);
      cost[FactorClass::LateralForce] += 0.5 * fr.residual.squaredNorm();
      if (sys) {
        sys->diag[i].noalias() += fr.d_state.transpose() * fr.d_state;
        sys->border[i].noalias() += fr.d_state.transpose() * fr.d_params;
        sys->corner.noalias() += fr.d_params.transpose() * fr.d_params;
        sys->g_state[i].noalias() += fr.d_state.transpose() * fr.residual;
        sys->g_param.noalias() += fr.d_params.transpose() * fr.residual;
      }
    }
  }
  return cost;
}

}  // namespace gripest::mhe
