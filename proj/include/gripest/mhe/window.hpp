#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "gripest/config.hpp"
#include "gripest/radar.hpp"
#include "gripest/types.hpp"
#include "gripest/zupt.hpp"

namespace gripest::mhe {

/// One state of the horizon together with the measurements bound to it.
struct WindowNode {
  VehicleState x;
  InputSample u;  // input seen by the measurement models at this state
  bool on_grid = false;
  std::optional<ZuptMeasurement> zupt;
  std::vector<DopplerFactor> doppler;

  double t() const { return x.t; }
};

/// Time-ordered states of one MHE problem, the inputs between them and the
/// priors summarising everything that already left the horizon.
///
/// Raw IMU and steering samples are buffered so that interval inputs can be
/// recomputed exactly when a state is inserted back in time.
class SlidingWindow {
 public:
  explicit SlidingWindow(const VehicleConfig& cfg);

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<WindowNode>& nodes() const { return nodes_; }
  WindowNode& node(std::size_t i) { return nodes_[i]; }
  const WindowNode& node(std::size_t i) const { return nodes_[i]; }
  const WindowNode& newest() const { return nodes_.back(); }
  const WindowNode& oldest() const { return nodes_.front(); }
  double span() const { return empty() ? 0.0 : nodes_.back().t() - nodes_.front().t(); }

  /// Index of the state at t (within kTimeEps), if any.
  std::optional<std::size_t> index_of(double t) const { return find(t); }

  /// Input driving the transition from node i to node i + 1.
  const InputSample& interval_input(std::size_t i) const { return intervals_[i]; }

  void add_imu(const ImuSample& s);
  /// `delta` must already be the road-wheel angle.
  void add_steering(const SteeringSample& s);

  /// Appends a state at t predicted from the newest one and links it with a
  /// process interval. An empty window is bootstrapped with zero velocity and
  /// the configured biases. Throws WindowOrderError when t <= newest time.
  std::size_t push_state(double t);

  /// Returns the index of the state at t, creating it if needed: inside the
  /// horizon the enclosing interval is split and the new state is linearly
  /// interpolated; past the newest state it is predicted forward.
  /// Throws StaleScanError when t precedes the oldest state.
  std::size_t insert_state(double t);

  /// State estimate at t without modifying the window (interpolation inside
  /// the horizon, forward prediction past it).
  VehicleState predict_state(double t) const;

  /// Drops the oldest states until span <= dTw. When the oldest state changes
  /// the state prior is re-anchored on the new oldest estimate. Returns the
  /// number of states removed.
  int shift();

  void set_state(std::size_t i, const Vec6& x) { nodes_[i].x = VehicleState::from_vec(nodes_[i].t(), x); }

  const VehicleState& prior_state() const { return prior_x_; }
  const Vec6& prior_state_variance() const { return prior_x_var_; }
  const TireParamSet& prior_params() const { return prior_p_; }
  const Vec12& prior_params_variance() const { return prior_p_var_; }
  void set_prior_params(const TireParamSet& p) { prior_p_ = p; }
  void set_prior_state(const VehicleState& x) { prior_x_ = x; }

  /// Mean IMU input over [ta, tb) with the steering angle held from ta.
  InputSample interval_mean(double ta, double tb) const;
  /// Measurement-model input at t: mean over (t - dt, t], steering held at t.
  InputSample input_at(double t) const;

  static constexpr double kTimeEps = 1e-7;

 private:
  std::optional<std::size_t> find(double t) const;
  double steering_at(double t) const;
  void prune_buffers();

  VehicleConfig cfg_;
  std::vector<WindowNode> nodes_;
  std::vector<InputSample> intervals_;
  std::deque<ImuSample> imu_;
  std::deque<SteeringSample> steering_;
  VehicleState prior_x_;
  Vec6 prior_x_var_;
  TireParamSet prior_p_;
  Vec12 prior_p_var_;
};

}  // namespace gripest::mhe
