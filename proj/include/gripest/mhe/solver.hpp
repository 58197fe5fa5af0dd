#pragma once

#include <vector>

#include "gripest/config.hpp"
#include "gripest/mhe/problem.hpp"
#include "gripest/mhe/window.hpp"

namespace gripest::mhe {

enum class Termination { MaxIterations, TimeLimit, GradientTolerance, StepTolerance };
const char* to_string(Termination t);

struct SolveReport {
  int iterations = 0;           // linear solves attempted
  int accepted_steps = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double wall_time = 0.0;       // s
  Termination termination = Termination::MaxIterations;
  CostBreakdown final_breakdown;
};

struct SolveResult {
  std::vector<Vec6> states;
  TireParamSet params;
  SolveReport report;
};

/// Projects a parameter vector onto the configured box.
Vec12 clamp_to_bounds(const Vec12& P, const ParamBounds& bounds);

/// Levenberg-Marquardt over all window states and the tire parameters.
/// Parameters are kept inside the box: components sitting on a bound with
/// the gradient pointing outward are frozen for the step, and the updated
/// vector is projected back onto the box. A step is accepted only if it
/// lowers the cost, so the final cost never exceeds the initial one.
/// Throws NumericError if the cost at the starting point is not finite.
SolveResult solve(const SlidingWindow& window, const TireParamSet& P_current,
                  const VehicleConfig& cfg, bool use_lateral_force = true);

}  // namespace gripest::mhe
