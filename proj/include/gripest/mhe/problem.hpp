#pragma once

#include <array>
#include <vector>

#include "gripest/config.hpp"
#include "gripest/mhe/block_solver.hpp"
#include "gripest/mhe/window.hpp"

namespace gripest::mhe {

enum class FactorClass { PriorState = 0, PriorParams, Process, Zupt, Doppler, LateralForce };
inline constexpr int kFactorClassCount = 6;
const char* to_string(FactorClass c);

/// Cost per residual class, 0.5 * sum rho(|r|^2).
struct CostBreakdown {
  std::array<double, kFactorClassCount> by_class{};
  double total() const;
  double& operator[](FactorClass c) { return by_class[static_cast<int>(c)]; }
  double operator[](FactorClass c) const { return by_class[static_cast<int>(c)]; }
};

/// Cauchy loss rho(s) = c^2 log(1 + s / c^2) on a squared residual s.
double cauchy_loss(double s, double scale);
double cauchy_weight(double s, double scale);  // rho'(s)

/// Frozen view of a window for one solve: the residual set (including the
/// lateral-force gate decisions) does not change between iterations.
class WindowProblem {
 public:
  WindowProblem(const SlidingWindow& window, const VehicleConfig& cfg,
                bool use_lateral_force = true);

  std::size_t num_states() const { return window_.size(); }
  std::vector<Vec6> initial_states() const;
  const std::vector<char>& lateral_force_gate() const { return fy_gate_; }

  /// Cost at (X, P). Non-finite contributions are kept as they are.
  CostBreakdown evaluate(const std::vector<Vec6>& X, const Vec12& P) const;

  /// Cost plus Gauss-Newton normal equations (Cauchy residuals reweighted).
  CostBreakdown linearize(const std::vector<Vec6>& X, const Vec12& P, BlockArrowSystem& sys) const;

 private:
  CostBreakdown accumulate(const std::vector<Vec6>& X, const Vec12& P,
                           BlockArrowSystem* sys) const;

  const SlidingWindow& window_;
  const VehicleConfig& cfg_;
  std::vector<char> fy_gate_;
};

}  // namespace gripest::mhe
