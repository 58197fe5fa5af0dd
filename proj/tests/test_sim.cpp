#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gripest/errors.hpp"
#include "gripest/event_io.hpp"
#include "gripest/radar.hpp"
#include "gripest/sim/scenario.hpp"
#include "gripest/tire.hpp"

using namespace gripest;
using namespace gripest::sim;

namespace {

VehicleConfig cfg() { return validate_config(default_config()); }

const TruthState& at(const std::vector<TruthState>& traj, double t) {
  const auto it = std::lower_bound(traj.begin(), traj.end(), t,
                                   [](const TruthState& s, double v) { return s.t < v - 1e-9; });
  return it == traj.end() ? traj.back() : *it;
}

}  // namespace

TEST_CASE("invert magic formula") {
  const PacejkaAxleParams p = nominal_tire_params().front;
  for (double y : {-1.2, -0.3, 0.0, 0.4, 1.1}) {
    CHECK(magic_formula(invert_magic_formula(y, p), p) == doctest::Approx(y).epsilon(1e-9));
  }
}

TEST_CASE("maneuver script bookkeeping") {
  const VehicleConfig c = cfg();
  const ManeuverScript m = constant_radius(20.0, 8.0, 8.0, nominal_tire_params(), c);
  CHECK(m.duration() > 10.0);
  CHECK(m.speed(0.0) == 0.0);
  CHECK(m.steer(0.5) == 0.0);
  CHECK(m.segment_start("turn_in") > kPreamble);
  CHECK(m.segment_start("nonexistent") < 0.0);
}

TEST_CASE("straight driving keeps the lateral state at rest") {
  const VehicleConfig c = cfg();
  ManeuverScript m{"straight", {{"go", 4.0, 0.0, 20.0, {}}, {"cruise", 2.0, 20.0, 20.0, {}}}};
  const auto traj = simulate_truth(m, nominal_tire_params(), c);
  for (const auto& s : traj) {
    CHECK(s.vy == 0.0);
    CHECK(s.r == 0.0);
    CHECK(s.Fyf == 0.0);
  }
  CHECK(traj.back().vx == doctest::Approx(20.0));
  CHECK_THROWS_AS(simulate_truth(m, nominal_tire_params(), c, 2e-3), RangeError);
}

TEST_CASE("constant radius reaches moment balance") {
  const VehicleConfig c = cfg();
  const ManeuverScript m = constant_radius(20.0, 8.0, 8.0, nominal_tire_params(), c);
  const auto traj = simulate_truth(m, nominal_tire_params(), c);
  const double t_end_hold = m.segment_start("turn_out");
  REQUIRE(t_end_hold > 0.0);
  const TruthState& s = at(traj, t_end_hold - 0.5);
  const double front = s.Fyf * c.lf * std::cos(s.delta);
  const double rear = s.Fyr * c.lr;
  CHECK(std::abs(front - rear) <= 0.01 * std::abs(rear));
  CHECK(s.ay == doctest::Approx(8.0).epsilon(0.02));
}

TEST_CASE("double lane change reverses lateral velocity") {
  const VehicleConfig c = cfg();
  const auto traj = simulate_truth(double_lane_change(65.0, nominal_tire_params(), c), nominal_tire_params(), c);
  double vy_min = 0.0, vy_max = 0.0;
  for (const auto& s : traj) {
    vy_min = std::min(vy_min, s.vy);
    vy_max = std::max(vy_max, s.vy);
  }
  CHECK(vy_min < -0.1);
  CHECK(vy_max > 0.1);
  CHECK(std::abs(traj.back().vx - 65.0) < 1e-9);
}

TEST_CASE("truth forces follow the tire model") {
  const VehicleConfig c = cfg();
  const TireParamSet P = nominal_tire_params();
  const auto traj = simulate_truth(slalom(25.0, 6.0, 2.0, 2, P, c), P, c);
  for (std::size_t k = 0; k < traj.size(); k += 97) {
    const TruthState& s = traj[k];
    if (s.vx < c.thresholds.V_Fy_min) continue;
    InputSample u;
    u.ax_meas = s.ax;
    u.delta = s.delta;
    const LateralForces f = model_lateral_forces(s.vehicle_state(), u, P, c);
    CHECK(f.Fyf == doctest::Approx(s.Fyf).epsilon(1e-9));
    CHECK(f.Fyr == doctest::Approx(s.Fyr).epsilon(1e-9));
  }
}

TEST_CASE("imu synthesis") {
  const VehicleConfig c = cfg();
  ManeuverScript m{"still", {{"rest", 1.0, 0.0, 0.0, {}}}};
  const auto traj = simulate_truth(m, nominal_tire_params(), c);
  ImuNoise quiet;
  quiet.accel_std = 0.0;
  quiet.gyro_std = 0.0;
  quiet.bias = Vec3(0.1, -0.2, 0.003);
  Rng rng(1);
  const auto imu = gen_imu(traj, quiet, c.g, rng);
  CHECK(imu.size() == 201);
  CHECK(imu[1].t == doctest::Approx(0.005));
  CHECK(imu[5].ax == doctest::Approx(0.1));
  CHECK(imu[5].ay == doctest::Approx(-0.2));
  CHECK(imu[5].r == doctest::Approx(0.003));
  CHECK(*imu[5].az == doctest::Approx(c.g));
}

TEST_CASE("radar synthesis") {
  const VehicleConfig c = cfg();
  TruthState s;
  s.t = 1.0;
  s.vx = 60.0;
  RadarNoise n;
  n.gamma_vd = 1e-9;
  n.angle_std = 0.0;
  n.gamma_phi = 1e-9;
  Rng rng(3);
  const RadarScan scan = gen_radar_scan(s, 0, c.radars[0], c.fov, n, rng);
  CHECK(scan.t_receive - scan.t_capture == doctest::Approx(0.09).epsilon(0.2));
  REQUIRE(!scan.points.empty());
  for (const auto& p : scan.points) {
    CHECK(std::abs(p.azimuth) <= c.fov.azimuth_max);
    CHECK(std::abs(p.doppler) <= c.radars[0].nyquist + 1e-12);
    const double truth = expected_doppler(s.vehicle_state(), c.radars[0], p.azimuth, p.elevation).value;
    CHECK(p.doppler == doctest::Approx(wrap(truth, c.radars[0].nyquist)).epsilon(1e-6));
  }
}

TEST_CASE("scenario log is ordered and staggered") {
  const VehicleConfig c = cfg();
  const Preset p = make_preset("standstill", c, 5);
  const ScenarioResult r = run_scenario(p.script, p.truth_params, p.noise, c);
  REQUIRE(!r.log.empty());
  for (std::size_t i = 1; i < r.log.size(); ++i) CHECK(receive_time(r.log[i - 1]) <= receive_time(r.log[i]));

  std::vector<double> captures;
  for (const auto& e : r.log)
    if (const auto* s = std::get_if<RadarScan>(&e)) captures.push_back(s->t_capture);
  std::sort(captures.begin(), captures.end());
  REQUIRE(captures.size() > 10);
  CHECK(captures[1] - captures[0] == doctest::Approx(0.02).epsilon(1e-6));
  const double rate = static_cast<double>(captures.size() - 1) / (captures.back() - captures.front());
  CHECK(rate == doctest::Approx(50.0).epsilon(0.05));
  CHECK(r.truth[1].t - r.truth[0].t == doctest::Approx(0.01));
}

TEST_CASE("presets") {
  const VehicleConfig c = cfg();
  for (const auto& name : preset_names()) {
    const Preset p = make_preset(name, c, 1);
    CHECK(p.script.duration() > 0.0);
  }
  CHECK_THROWS_AS(make_preset("drift", c, 1), UsageError);
  const Preset lap = make_preset("fitting_lap", c, 9);
  const Vec12 init = lap.estimator_config.tire_init.vec();
  CHECK((init - lap.truth_params.vec()).norm() > 0.0);
  for (int j = 0; j < 12; ++j) {
    CHECK(init[j] >= c.bounds.P_min[j % 6]);
    CHECK(init[j] <= c.bounds.P_max[j % 6]);
  }
  CHECK(make_preset("dlc65", c, 1).cornering_start > kPreamble);
}

TEST_CASE("scenario generation is deterministic") {
  const VehicleConfig c = cfg();
  const Preset p = make_preset("slalom", c, 42);
  const ScenarioResult a = run_scenario(p.script, p.truth_params, p.noise, c);
  const ScenarioResult b = run_scenario(p.script, p.truth_params, p.noise, c);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); i += 13) CHECK(serialize_event(a.log[i]) == serialize_event(b.log[i]));
}
