#include "gripest/mhe/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gripest/errors.hpp"

namespace gripest::mhe {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::MaxIterations:
      return "max_iterations";
    case Termination::TimeLimit:
      return "time_limit";
    case Termination::GradientTolerance:
      return "gradient_tolerance";
    case Termination::StepTolerance:
      return "step_tolerance";
  }
  return "unknown";
}

Vec12 clamp_to_bounds(const Vec12& P, const ParamBounds& bounds) {
  Vec12 lo, hi;
  lo << bounds.P_min, bounds.P_min;
  hi << bounds.P_max, bounds.P_max;
  return P.cwiseMax(lo).cwiseMin(hi);
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kMinDiag = 1e-6;
constexpr double kMaxDiag = 1e32;

void check_finite(const CostBreakdown& c) {
  for (int k = 0; k < kFactorClassCount; ++k) {
    if (!std::isfinite(c.by_class[static_cast<std::size_t>(k)])) {
      throw NumericError(std::string("non-finite cost in residual class ") +
                         to_string(static_cast<FactorClass>(k)));
    }
  }
}

}  // namespace

SolveResult solve(const SlidingWindow& window, const TireParamSet& P_current,
                  const VehicleConfig& cfg, bool use_lateral_force) {
  const auto start = Clock::now();
  const SolverSettings& settings = cfg.solver;
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  if (window.empty()) throw InsufficientDataError("cannot solve an empty window");
  const WindowProblem problem(window, cfg, use_lateral_force);
  Vec12 lo, hi;
  lo << cfg.bounds.P_min, cfg.bounds.P_min;
  hi << cfg.bounds.P_max, cfg.bounds.P_max;

  std::vector<Vec6> X = problem.initial_states();
  Vec12 P = clamp_to_bounds(P_current.vec(), cfg.bounds);

  SolveResult out;
  BlockArrowSystem sys;
  CostBreakdown breakdown = problem.linearize(X, P, sys);
  check_finite(breakdown);
  double cost = breakdown.total();
  out.report.initial_cost = cost;

  double lambda = settings.lm_lambda_init;
  std::vector<Vec6> dx;
  Vec12 dp;
  Termination reason = Termination::MaxIterations;

  while (true) {
    // Bound components that the gradient would push further out stay put.
    std::array<bool, 12> fixed{};
    double grad_max = 0.0;
    for (auto& g : sys.g_state) grad_max = std::max(grad_max, g.cwiseAbs().maxCoeff());
    for (int j = 0; j < 12; ++j) {
      const double g = sys.g_param[j];
      fixed[static_cast<std::size_t>(j)] = (P[j] <= lo[j] && g > 0.0) || (P[j] >= hi[j] && g < 0.0);
      if (!fixed[static_cast<std::size_t>(j)]) grad_max = std::max(grad_max, std::abs(g));
    }
    if (grad_max <= settings.gradient_tol) {
      reason = Termination::GradientTolerance;
      break;
    }
    if (out.report.iterations >= settings.max_iterations) {
      reason = Termination::MaxIterations;
      break;
    }
    if (elapsed() >= settings.max_time) {
      reason = Termination::TimeLimit;
      break;
    }

    BlockArrowSystem damped = sys;
    for (std::size_t i = 0; i < damped.num_states(); ++i) {
      const Vec6 d = sys.diag[i].diagonal().cwiseMax(kMinDiag).cwiseMin(kMaxDiag);
      damped.diag[i].diagonal() += lambda * d;
    }
    const Vec12 dpd = sys.corner.diagonal().cwiseMax(kMinDiag).cwiseMin(kMaxDiag);
    damped.corner.diagonal() += lambda * dpd;
    for (int j = 0; j < 12; ++j) {
      if (!fixed[static_cast<std::size_t>(j)]) continue;
      for (auto& b : damped.border) b.col(j).setZero();
      damped.corner.row(j).setZero();
      damped.corner.col(j).setZero();
      damped.corner(j, j) = 1.0;
      damped.g_param[j] = 0.0;
    }

    ++out.report.iterations;
    if (!solve_block_arrow(damped, dx, dp)) {
      lambda *= 10.0;
      continue;
    }

    std::vector<Vec6> X_new(X.size());
    double step_sq = 0.0, x_sq = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      X_new[i] = X[i] + dx[i];
      step_sq += dx[i].squaredNorm();
      x_sq += X[i].squaredNorm();
    }
    const Vec12 P_new = clamp_to_bounds(P + dp, cfg.bounds);
    step_sq += (P_new - P).squaredNorm();
    x_sq += P.squaredNorm();

    // Predicted decrease of the damped quadratic model.
    double g_dot = sys.g_param.dot(dp);
    double damp_term = 0.0;
    for (std::size_t i = 0; i < dx.size(); ++i) {
      g_dot += sys.g_state[i].dot(dx[i]);
      damp_term += dx[i].dot((damped.diag[i] - sys.diag[i]).diagonal().cwiseProduct(dx[i]));
    }
    damp_term += dp.dot(lambda * dpd.cwiseProduct(dp));
    const double predicted = 0.5 * (damp_term - g_dot);

    const double new_cost = problem.evaluate(X_new, P_new).total();
    if (std::isfinite(new_cost) && new_cost < cost) {
      const double rho = predicted > 0.0 ? (cost - new_cost) / predicted : 1.0;
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      X = std::move(X_new);
      P = P_new;
      ++out.report.accepted_steps;
      if (std::sqrt(step_sq) <= settings.step_tol * (std::sqrt(x_sq) + settings.step_tol)) {
        breakdown = problem.evaluate(X, P);
        cost = breakdown.total();
        reason = Termination::StepTolerance;
        break;
      }
      breakdown = problem.linearize(X, P, sys);
      cost = breakdown.total();
    } else {
      lambda *= 10.0;
      if (std::sqrt(step_sq) <= settings.step_tol * (std::sqrt(x_sq) + settings.step_tol)) {
        reason = Termination::StepTolerance;
        break;
      }
    }
  }

  out.states = std::move(X);
  out.params = TireParamSet::from_vec(P);
  out.report.final_cost = cost;
  out.report.final_breakdown = breakdown;
  out.report.termination = reason;
  out.report.wall_time = elapsed();
  return out;
}

}  // namespace gripest::mhe
