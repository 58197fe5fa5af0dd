#include "gripest/mhe/window.hpp"

#include <algorithm>
#include <cmath>

#include "gripest/errors.hpp"
#include "gripest/motion.hpp"

namespace gripest::mhe {

SlidingWindow::SlidingWindow(const VehicleConfig& cfg)
    : cfg_(cfg),
      prior_x_var_(cfg.covariances.Sigma_x0),
      prior_p_(cfg.tire_init),
      prior_p_var_(cfg.covariances.Sigma_P) {}

void SlidingWindow::add_imu(const ImuSample& s) {
  if (!imu_.empty() && s.t < imu_.back().t) {
    // Late sample: keep the buffer ordered.
    auto it = std::upper_bound(imu_.begin(), imu_.end(), s.t,
                               [](double t, const ImuSample& v) { return t < v.t; });
    imu_.insert(it, s);
    return;
  }
  imu_.push_back(s);
}

void SlidingWindow::add_steering(const SteeringSample& s) {
  if (!steering_.empty() && s.t < steering_.back().t) {
    auto it = std::upper_bound(steering_.begin(), steering_.end(), s.t,
                               [](double t, const SteeringSample& v) { return t < v.t; });
    steering_.insert(it, s);
    return;
  }
  steering_.push_back(s);
}

double SlidingWindow::steering_at(double t) const {
  auto it = std::upper_bound(steering_.begin(), steering_.end(), t + kTimeEps,
                             [](double v, const SteeringSample& s) { return v < s.t; });
  if (it == steering_.begin()) return steering_.empty() ? 0.0 : steering_.front().delta;
  return std::prev(it)->delta;
}

InputSample SlidingWindow::interval_mean(double ta, double tb) const {
  InputSample u;
  u.t = ta;
  u.delta = steering_at(ta);
  double sx = 0.0, sy = 0.0, sr = 0.0;
  int count = 0;
  auto first = std::lower_bound(imu_.begin(), imu_.end(), ta - kTimeEps,
                                [](const ImuSample& s, double v) { return s.t < v; });
  for (auto it = first; it != imu_.end() && it->t < tb - kTimeEps; ++it) {
    sx += it->ax;
    sy += it->ay;
    sr += it->r;
    ++count;
  }
  if (count > 0) {
    u.ax_meas = sx / count;
    u.ay_meas = sy / count;
    u.r_meas = sr / count;
    return u;
  }
  // No sample inside the interval: hold the latest one before its end.
  auto last = std::lower_bound(imu_.begin(), imu_.end(), tb - kTimeEps,
                               [](const ImuSample& s, double v) { return s.t < v; });
  if (last != imu_.begin()) {
    --last;
    u.ax_meas = last->ax;
    u.ay_meas = last->ay;
    u.r_meas = last->r;
  }
  return u;
}

InputSample SlidingWindow::input_at(double t) const {
  InputSample u;
  u.t = t;
  u.delta = steering_at(t);
  const double from = t - cfg_.thresholds.dt;
  double sx = 0.0, sy = 0.0, sr = 0.0;
  int count = 0;
  auto end = std::upper_bound(imu_.begin(), imu_.end(), t + kTimeEps,
                              [](double v, const ImuSample& s) { return v < s.t; });
  for (auto it = end; it != imu_.begin();) {
    --it;
    if (it->t <= from + kTimeEps) {
      if (count == 0) {
        u.ax_meas = it->ax;
        u.ay_meas = it->ay;
        u.r_meas = it->r;
      }
      break;
    }
    sx += it->ax;
    sy += it->ay;
    sr += it->r;
    ++count;
  }
  if (count > 0) {
    u.ax_meas = sx / count;
    u.ay_meas = sy / count;
    u.r_meas = sr / count;
  }
  return u;
}

std::optional<std::size_t> SlidingWindow::find(double t) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - kTimeEps,
                             [](const WindowNode& n, double v) { return n.t() < v; });
  if (it != nodes_.end() && std::abs(it->t() - t) <= kTimeEps) {
    return static_cast<std::size_t>(it - nodes_.begin());
  }
  return std::nullopt;
}

std::size_t SlidingWindow::push_state(double t) {
  if (!std::isfinite(t)) throw WindowOrderError("push_state with non-finite time");
  if (nodes_.empty()) {
    WindowNode n;
    n.x.t = t;
    n.x.bx = cfg_.bias_init[0];
    n.x.by = cfg_.bias_init[1];
    n.x.br = cfg_.bias_init[2];
    n.u = input_at(t);
    n.on_grid = true;
    nodes_.push_back(n);
    prior_x_ = n.x;
    return 0;
  }
  const double t_new = nodes_.back().t();
  if (t <= t_new + kTimeEps) {
    throw WindowOrderError("push_state at t=" + std::to_string(t) +
                           " is not after the newest state t=" + std::to_string(t_new));
  }
  const InputSample u = interval_mean(t_new, t);
  WindowNode n;
  n.x = state_transition(nodes_.back().x, u, t - t_new);
  n.x.t = t;
  n.u = input_at(t);
  n.on_grid = true;
  intervals_.push_back(u);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

VehicleState SlidingWindow::predict_state(double t) const {
  if (nodes_.empty()) throw StaleScanError("window is empty");
  if (t < nodes_.front().t() - kTimeEps) {
    throw StaleScanError("time " + std::to_string(t) + " precedes the window start " +
                         std::to_string(nodes_.front().t()));
  }
  if (auto idx = find(t)) return nodes_[*idx].x;
  if (t > nodes_.back().t()) {
    VehicleState x = state_transition(nodes_.back().x, interval_mean(nodes_.back().t(), t),
                                      t - nodes_.back().t());
    x.t = t;
    return x;
  }
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                             [](double v, const WindowNode& n) { return v < n.t(); });
  const WindowNode& b = *it;
  const WindowNode& a = *std::prev(it);
  const double w = (t - a.t()) / (b.t() - a.t());
  return VehicleState::from_vec(t, (1.0 - w) * a.x.vec() + w * b.x.vec());
}

std::size_t SlidingWindow::insert_state(double t) {
  if (auto idx = find(t)) return *idx;
  const VehicleState guess = predict_state(t);  // throws when stale
  WindowNode n;
  n.x = guess;
  n.u = input_at(t);
  if (t > nodes_.back().t()) {
    intervals_.push_back(interval_mean(nodes_.back().t(), t));
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                             [](double v, const WindowNode& node) { return v < node.t(); });
  const std::size_t idx = static_cast<std::size_t>(it - nodes_.begin());
  const double ta = nodes_[idx - 1].t();
  const double tb = nodes_[idx].t();
  nodes_.insert(it, std::move(n));
  intervals_[idx - 1] = interval_mean(ta, t);
  intervals_.insert(intervals_.begin() + static_cast<std::ptrdiff_t>(idx), interval_mean(t, tb));
  return idx;
}

int SlidingWindow::shift() {
  int dropped = 0;
  while (nodes_.size() > 1 && span() > cfg_.thresholds.dTw + kTimeEps) {
    nodes_.erase(nodes_.begin());
    intervals_.erase(intervals_.begin());
    ++dropped;
  }
  if (dropped > 0) {
    prior_x_ = nodes_.front().x;
    prune_buffers();
  }
  return dropped;
}

void SlidingWindow::prune_buffers() {
  const double keep_from = nodes_.front().t() - 2.0 * cfg_.thresholds.dt;
  while (imu_.size() > 1 && imu_.front().t < keep_from) imu_.pop_front();
  while (steering_.size() > 1 && steering_[1].t <= keep_from) steering_.pop_front();
}

}  // namespace gripest::mhe
