#include "gripest/mhe/estimator.hpp"

#include <cmath>
#include <limits>

#include "gripest/errors.hpp"
#include "gripest/event_io.hpp"
#include "gripest/radar.hpp"

namespace gripest::mhe {

namespace {

constexpr double kEps = SlidingWindow::kTimeEps;

}  // namespace

Estimator::Estimator(const VehicleConfig& cfg)
    : cfg_(cfg), window_(cfg_), params_(cfg.tire_init) {}

void Estimator::warn_once(const std::string& w) {
  for (const auto& existing : warnings_) {
    if (existing == w) return;
  }
  warnings_.push_back(w);
}

double Estimator::detector_speed() const {
  // While ZUPT holds the estimate at zero it cannot report a launch on its
  // own, so the raw radar ego speed is consulted as well.
  double v = -1.0;
  if (has_fix_ && !window_.empty()) v = std::hypot(window_.newest().x.vx, window_.newest().x.vy);
  v = std::max(v, radar_speed_);
  return v >= 0.0 ? v : std::numeric_limits<double>::infinity();
}

bool Estimator::attach(const SensorEvent& event) {
  const double t = receive_time(event);
  if (std::holds_alternative<ImuSample>(event) || std::holds_alternative<SteeringSample>(event)) {
    if (!window_.empty() && t < window_.oldest().t() - kEps) {
      throw StaleEventError("event at t=" + std::to_string(t) + " precedes the window");
    }
  }
  if (t > now_) now_ = t;
  if (const auto* s = std::get_if<ImuSample>(&event)) {
    on_imu(*s);
    return false;
  }
  if (const auto* s = std::get_if<SteeringSample>(&event)) {
    on_steering(*s);
    return false;
  }
  if (const auto* s = std::get_if<RadarScan>(&event)) return on_radar(*s);
  return false;  // reference velocity is for metrics only
}

void Estimator::process(const SensorEvent& event) {
  bool trigger = false;
  try {
    trigger = attach(event);
  } catch (const StaleScanError&) {
    ++stats_.stale_scans;
    ++stats_.stale_events;
    return;
  } catch (const StaleEventError&) {
    ++stats_.stale_events;
    return;
  }
  if (trigger) {
    solve_now(false);
  } else if (std::holds_alternative<ImuSample>(event) && !window_.empty() &&
             now_ - last_solve_t_ >= cfg_.thresholds.watchdog - kEps) {
    solve_now(true);
  }
}

void Estimator::on_imu(const ImuSample& s) {
  ++stats_.imu_samples;
  window_.add_imu(s);

  const double g = cfg_.g;
  const ImuSample3 s3 = to_imu3(s, g);
  attitude_buffer_.push_back(s3);
  while (attitude_buffer_.size() > 2 &&
         attitude_buffer_.front().t < s.t - cfg_.thresholds.T_stop - 0.05) {
    attitude_buffer_.pop_front();
  }

  const bool was_stationary = standstill_.stationary;
  // |a| - g misses most of a longitudinal launch; once an attitude is known
  // the full compensated vector is used.
  // Per-sample noise on three axes would flicker the detector, so it sees
  // a 50 ms low-pass of the specific force.
  if (!accel_lp_) {
    accel_lp_ = s3;
  } else {
    const double dt = std::max(0.0, s3.t - accel_lp_->t);
    const double k = dt / (0.05 + dt);
    accel_lp_->accel += k * (s3.accel - accel_lp_->accel);
    accel_lp_->t = s3.t;
  }
  const Vec3& a_lp = accel_lp_->accel;
  const double accel = attitude_ ? (a_lp - attitude_->gravity_body).norm() : std::abs(a_lp.norm() - g);
  standstill_ = update_standstill(standstill_, detector_speed(), accel, s.t, cfg_.thresholds);
  if (standstill_.stationary) {
    if (!was_stationary) {
      ++stats_.standstill_periods;
      standstill_seen_ = true;
      update_attitude(s.t);
    } else if (s.t - attitude_t_ >= cfg_.thresholds.T_stop - kEps) {
      update_attitude(s.t);
    }
  }
  const double v_now = detector_speed();
  if (!standstill_seen_ && std::isfinite(v_now) && v_now > cfg_.thresholds.V_min) {
    warn_once("biases unverified: vehicle moved before any standstill was detected");
  }

  if (!grid_origin_) {
    grid_origin_ = s.t;
    grid_index_ = 0;
    last_solve_t_ = s.t;
    push_grid_state(s.t);
    return;
  }
  while (true) {
    const double t_next = round_to_microseconds(
        *grid_origin_ + static_cast<double>(grid_index_ + 1) * cfg_.thresholds.dt);
    if (t_next > s.t + kEps) break;
    ++grid_index_;
    push_grid_state(t_next);
  }
}

void Estimator::on_steering(const SteeringSample& s) {
  SteeringSample road = s;
  road.delta = s.delta / cfg_.steering_ratio;
  if (!std::isfinite(road.delta) || std::abs(road.delta) > cfg_.delta_max) {
    throw RangeError("steering angle " + std::to_string(road.delta) + " rad at t=" +
                     std::to_string(s.t) + " exceeds delta_max");
  }
  window_.add_steering(road);
}

bool Estimator::on_radar(const RadarScan& scan) {
  ++stats_.scans;
  if (scan.t_receive - scan.t_capture > cfg_.thresholds.latency_max + kEps) {
    throw StaleScanError("scan latency " + std::to_string(scan.t_receive - scan.t_capture) +
                         " s exceeds latency_max");
  }
  if (scan.radar_id >= 0 &&
      static_cast<std::size_t>(scan.radar_id) < cfg_.radars.size()) {
    const double v =
        radar_ego_speed(scan, cfg_.radars[static_cast<std::size_t>(scan.radar_id)]);
    if (std::isfinite(v)) radar_speed_ = v;
  }
  const ScanFactors f = scan_to_factors(scan, window_, cfg_);
  stats_.rejected_snr += f.rejected_snr;
  stats_.rejected_innovation += f.rejected_innovation;
  stats_.rejected_alias += f.rejected_alias;
  stats_.accepted_points += static_cast<int>(f.factors.size());
  if (f.inserted_state) ++stats_.inserted_states;
  return !f.factors.empty();
}

void Estimator::push_grid_state(double t) {
  if (last_grid_t_) emit_row(*last_grid_t_);
  std::size_t idx;
  if (window_.empty() || t > window_.newest().t() + kEps) {
    idx = window_.push_state(t);
  } else {
    // A radar state was already created at or past this time.
    idx = window_.insert_state(t);
  }
  WindowNode& node = window_.node(idx);
  node.on_grid = true;
  node.u = window_.input_at(t);
  if (standstill_.stationary && attitude_) {
    const Vec2 a = gravity_compensate(node.u.ax_meas, node.u.ay_meas, *attitude_);
    node.zupt = ZuptMeasurement{a.x(), a.y(), node.u.r_meas};
  }
  last_grid_t_ = t;
}

void Estimator::emit_row(double t) {
  const auto idx = window_.index_of(t);
  if (!idx) return;
  const WindowNode& node = window_.node(*idx);
  rows_.push_back(make_output_row(node.x, node.u, params_, cfg_));
}

void Estimator::finish() {
  if (last_grid_t_) emit_row(*last_grid_t_);
  last_grid_t_.reset();
}

void Estimator::update_attitude(double t) {
  std::vector<ImuSample3> samples;
  for (const ImuSample3& s : attitude_buffer_) {
    if (s.t >= t - cfg_.thresholds.T_stop - 1e-6) samples.push_back(s);
  }
  try {
    attitude_ = estimate_attitude(samples, cfg_.thresholds.T_stop, cfg_.g);
    attitude_t_ = t;
  } catch (const InsufficientDataError&) {
    // Keep the previous attitude, if any.
  }
}

void Estimator::solve_now(bool watchdog) {
  if (window_.empty()) return;
  SolveResult r = solve(window_, params_, cfg_);
  for (std::size_t i = 0; i < r.states.size(); ++i) window_.set_state(i, r.states[i]);
  params_ = r.params;
  window_.set_prior_params(params_);
  window_.shift();
  reports_.push_back(r.report);
  ++stats_.solves;
  if (watchdog) {
    ++stats_.watchdog_solves;
  } else {
    has_fix_ = true;
  }
  last_solve_t_ = now_;
}

}  // namespace gripest::mhe
