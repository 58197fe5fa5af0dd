#include "gripest/sim/maneuver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "gripest/errors.hpp"
#include "gripest/tire.hpp"

namespace gripest::sim {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return 0.5 * (1.0 - std::cos(kPi * s));
}

Segment hold(std::string name, double duration, double v) {
  return {std::move(name), duration, v, v, {}};
}

Segment ramp(std::string name, double v0, double v1, double peak_accel, double min_duration) {
  const double T = std::max(min_duration, std::abs(v1 - v0) * kPi / (2.0 * peak_accel));
  return {std::move(name), T, v0, v1, {}};
}

}  // namespace

double ManeuverScript::duration() const {
  double d = 0.0;
  for (const Segment& s : segments) d += s.duration;
  return d;
}

namespace {

// Segment containing t and the segment-local time.
std::pair<const Segment*, double> locate(const ManeuverScript& m, double t) {
  double start = 0.0;
  for (const Segment& s : m.segments) {
    if (t < start + s.duration) return {&s, std::max(0.0, t - start)};
    start += s.duration;
  }
  if (m.segments.empty()) return {nullptr, 0.0};
  return {&m.segments.back(), m.segments.back().duration};
}

}  // namespace

double ManeuverScript::speed(double t) const {
  auto [s, tau] = locate(*this, t);
  if (!s) return 0.0;
  if (s->duration <= 0.0) return s->v_end;
  return s->v_start + (s->v_end - s->v_start) * smoothstep(tau / s->duration);
}

double ManeuverScript::accel(double t) const {
  auto [s, tau] = locate(*this, t);
  if (!s || s->duration <= 0.0 || tau >= s->duration) return 0.0;
  return (s->v_end - s->v_start) * kPi / (2.0 * s->duration) * std::sin(kPi * tau / s->duration);
}

double ManeuverScript::steer(double t) const {
  auto [s, tau] = locate(*this, t);
  if (!s || !s->steer) return 0.0;
  return s->steer(tau);
}

double ManeuverScript::segment_start(const std::string& prefix) const {
  double start = 0.0;
  for (const Segment& s : segments) {
    if (s.name.rfind(prefix, 0) == 0) return start;
    start += s.duration;
  }
  return -1.0;
}

double invert_magic_formula(double y, const PacejkaAxleParams& p) {
  // phi(z) = Bz - E(Bz - atan Bz) is increasing for E <= 1; y peaks where
  // C atan(phi) = pi/2, which exists only for C > 1.
  constexpr double kZMax = 1.5;
  auto phi = [&](double z) {
    const double bz = p.B * z;
    return bz - p.E * (bz - std::atan(bz));
  };
  double z_peak = kZMax;
  if (p.C > 1.0) {
    const double target = std::tan(kPi / (2.0 * p.C));
    double lo = 0.0, hi = kZMax;
    if (phi(hi) > target) {
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < target ? lo : hi) = mid;
      }
      z_peak = 0.5 * (lo + hi);
    }
  }
  double lo = -z_peak - p.Sh, hi = z_peak - p.Sh;
  if (y < magic_formula(lo, p) || y > magic_formula(hi, p)) {
    throw RangeError("normalised force " + std::to_string(y) + " beyond the tire peak");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (magic_formula(mid, p) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double steady_state_steer(double vx, double ay, const TireParamSet& P, const VehicleConfig& cfg) {
  const double L = cfg.wheelbase();
  const double r = ay / vx;
  VehicleState x;
  x.vx = vx;
  const VerticalLoads fz = vertical_loads(x, InputSample{}, cfg);

  // Rear axle fixes the side-slip, the front axle then fixes the steer.
  const double Fyr = cfg.m * ay * cfg.lf / L;
  const double alpha_r = -invert_magic_formula(Fyr / fz.Fzr, P.rear);
  const double vy = vx * std::tan(alpha_r) + r * cfg.lr;
  const double beta_f = std::atan((vy + r * cfg.lf) / vx);
  double delta = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double Fyf = cfg.m * ay * cfg.lr / (L * std::cos(delta));
    const double next = beta_f + invert_magic_formula(Fyf / fz.Fzf, P.front);
    if (std::abs(next - delta) < 1e-14) {
      delta = next;
      break;
    }
    delta = next;
  }
  return delta;
}

std::function<double(double)> steer_for_lateral_accel(std::function<double(double)> ay,
                                                      double vx, const TireParamSet& P,
                                                      const VehicleConfig& cfg,
                                                      double ay_abs_max) {
  // Tabulate the steady-state inversion once; the truth integrator calls
  // the steering profile several thousand times per simulated second.
  constexpr int kN = 801;
  auto table = std::make_shared<std::vector<double>>(kN);
  for (int i = 0; i < kN; ++i) {
    const double a = -ay_abs_max + 2.0 * ay_abs_max * i / (kN - 1);
    (*table)[static_cast<std::size_t>(i)] = steady_state_steer(vx, a, P, cfg);
  }
  return [ay = std::move(ay), table, ay_abs_max](double tau) {
    const double a = std::clamp(ay(tau), -ay_abs_max, ay_abs_max);
    const double pos = (a + ay_abs_max) / (2.0 * ay_abs_max) * (kN - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(kN - 2));
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * (*table)[i] + w * (*table)[i + 1];
  };
}

namespace {

std::vector<Segment> preamble_and_launch(double speed, double peak_accel) {
  return {hold("standstill", kPreamble, 0.0), ramp("accelerate", 0.0, speed, peak_accel, 3.0),
          hold("approach", 1.0, speed)};
}

// Steering ramp into and out of a steady corner.
void add_corner(std::vector<Segment>& segs, const std::string& tag, double speed, double ay,
                double hold_time, const TireParamSet& P, const VehicleConfig& cfg,
                double transition = 1.0) {
  const double d = steady_state_steer(speed, ay, P, cfg);
  segs.push_back({"turn_in_" + tag, transition, speed, speed,
                  [d, transition](double tau) { return d * smoothstep(tau / transition); }});
  segs.push_back({"corner_" + tag, hold_time, speed, speed, [d](double) { return d; }});
  segs.push_back({"turn_out_" + tag, transition, speed, speed,
                  [d, transition](double tau) { return d * (1.0 - smoothstep(tau / transition)); }});
}

}  // namespace

ManeuverScript double_lane_change(double speed, const TireParamSet& P, const VehicleConfig& cfg) {
  // Lateral offset 3.5 m; each lane change is one full sine period of
  // lateral acceleration with a 12 m/s^2 peak, y(T) = A T^2 / (2 pi).
  constexpr double kOffset = 3.5;
  constexpr double kPeak = 12.0;
  const double T = std::sqrt(kOffset * 2.0 * kPi / kPeak);
  ManeuverScript m{"dlc", preamble_and_launch(speed, 8.5)};
  auto out = [T](double tau) { return kPeak * std::sin(2.0 * kPi * tau / T); };
  auto back = [T](double tau) { return -kPeak * std::sin(2.0 * kPi * tau / T); };
  m.segments.push_back(
      {"lane_change_out", T, speed, speed, steer_for_lateral_accel(out, speed, P, cfg, kPeak * 1.05)});
  m.segments.push_back(hold("offset_lane", 0.6, speed));
  m.segments.push_back(
      {"lane_change_back", T, speed, speed, steer_for_lateral_accel(back, speed, P, cfg, kPeak * 1.05)});
  m.segments.push_back(hold("exit", 1.5, speed));
  return m;
}

ManeuverScript constant_radius(double speed, double ay, double hold_time, const TireParamSet& P,
                               const VehicleConfig& cfg) {
  ManeuverScript m{"constant_radius", preamble_and_launch(speed, 4.0)};
  add_corner(m.segments, "1", speed, ay, hold_time, P, cfg, 1.5);
  m.segments.push_back(hold("exit", 1.0, speed));
  return m;
}

ManeuverScript slalom(double speed, double ay, double period, int cycles, const TireParamSet& P,
                      const VehicleConfig& cfg) {
  ManeuverScript m{"slalom", preamble_and_launch(speed, 5.0)};
  auto profile = [ay, period](double tau) { return ay * std::sin(2.0 * kPi * tau / period); };
  m.segments.push_back({"slalom", period * cycles, speed, speed,
                        steer_for_lateral_accel(profile, speed, P, cfg, std::abs(ay) * 1.05)});
  m.segments.push_back(hold("exit", 1.0, speed));
  return m;
}

ManeuverScript straight_brake_turn(const TireParamSet& P, const VehicleConfig& cfg) {
  ManeuverScript m{"straight_brake_turn", preamble_and_launch(30.0, 6.0)};
  m.segments.push_back(hold("cruise", 2.0, 30.0));
  m.segments.push_back({"brake", 2.5, 30.0, 15.0, {}});
  add_corner(m.segments, "1", 15.0, 6.0, 3.0, P, cfg);
  m.segments.push_back(hold("exit", 1.0, 15.0));
  return m;
}

ManeuverScript fitting_lap(const TireParamSet& P, const VehicleConfig& cfg) {
  struct Corner {
    double speed, ay;
  };
  // Alternating directions, rising toward ~85-90 % of the tire peak.
  const Corner corners[] = {{15.0, 4.0},   {20.0, -6.0},  {25.0, 8.0},   {30.0, -10.0},
                            {25.0, 11.0},  {20.0, -12.0}, {20.0, 13.5},  {30.0, -12.5},
                            {35.0, 9.0}};
  ManeuverScript m{"fitting_lap", {hold("standstill", kPreamble, 0.0)}};
  m.segments.push_back(ramp("accelerate", 0.0, corners[0].speed, 4.0, 3.0));
  double v = corners[0].speed;
  int k = 0;
  for (const Corner& c : corners) {
    ++k;
    m.segments.push_back({"straight_" + std::to_string(k), 2.0, v, c.speed, {}});
    add_corner(m.segments, std::to_string(k), c.speed, c.ay, 2.5, P, cfg);
    v = c.speed;
  }
  m.segments.push_back(hold("exit", 1.0, v));
  return m;
}

ManeuverScript spin(const TireParamSet& P, const VehicleConfig& cfg) {
  constexpr double kSpeed = 20.0;
  ManeuverScript m{"spin", preamble_and_launch(kSpeed, 4.0)};
  const double d = 1.6 * steady_state_steer(kSpeed, 6.0, P, cfg);
  m.segments.push_back(
      {"steer_ramp", 2.0, kSpeed, kSpeed, [d](double tau) { return d * smoothstep(tau / 2.0); }});
  m.segments.push_back({"steer_hold", 1.5, kSpeed, kSpeed, [d](double) { return d; }});
  m.segments.push_back({"release", 1.5, kSpeed, kSpeed,
                        [d](double tau) { return d * (1.0 - smoothstep(tau / 1.5)); }});
  m.segments.push_back(hold("exit", 2.0, kSpeed));
  return m;
}

ManeuverScript standstill(double duration) {
  return {"standstill", {hold("standstill", duration, 0.0)}};
}

}  // namespace gripest::sim
