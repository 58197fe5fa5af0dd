#include <doctest.h>

#include <cmath>
#include <random>

#include "gripest/errors.hpp"
#include "gripest/mhe/window.hpp"
#include "gripest/radar.hpp"
#include "gripest/sim/sensors.hpp"

using namespace gripest;

namespace {

constexpr double kVN = 26.5;

VehicleState moving(double vx, double vy = 0.0, double r = 0.0) { return {0.0, vx, vy, r, 0, 0, 0}; }

RadarExtrinsics at_origin() { return RadarExtrinsics{}; }

}  // namespace

TEST_CASE("bearing vector is a unit vector") {
  CHECK(bearing_vector(0.1, 0.05).norm() == doctest::Approx(1.0).epsilon(1e-12));
  const Vec3 b = bearing_vector(0.0, 0.0);
  CHECK(b.x() == 1.0);
}

TEST_CASE("expected doppler examples") {
  // forward motion seen on boresight closes at -vx
  CHECK(expected_doppler(moving(10), at_origin(), 0.0, 0.0).value == doctest::Approx(-10.0));

  // pure yaw with a 2 m lever arm, beam pointing left
  RadarExtrinsics lever;
  lever.translation = Vec3(2, 0, 0);
  CHECK(expected_doppler(moving(0, 0, 1), lever, M_PI / 2, 0.0).value ==
        doctest::Approx(-2.0).epsilon(1e-12));

  // radar yawed 90 deg left sees no forward motion on its boresight
  RadarExtrinsics left;
  left.rotation = yaw_rotation(M_PI / 2);
  CHECK(std::abs(expected_doppler(moving(10), left, 0.0, 0.0).value) < 1e-12);
}

TEST_CASE("expected doppler gradient") {
  RadarExtrinsics ext;
  ext.rotation = yaw_rotation(0.4);
  ext.translation = Vec3(0.4, 0.55, 0.5);
  const VehicleState x = moving(20, 0.8, 0.3);
  const DopplerPrediction p = expected_doppler(x, ext, 0.3, -0.05);
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    Vec6 a = x.vec(), b = x.vec();
    a[j] += h;
    b[j] -= h;
    const double fd = (expected_doppler(VehicleState::from_vec(0, a), ext, 0.3, -0.05).value -
                       expected_doppler(VehicleState::from_vec(0, b), ext, 0.3, -0.05).value) /
                      (2 * h);
    CHECK(fd == doctest::Approx(p.d_state[j]).epsilon(1e-8));
  }
}

TEST_CASE("wrap folds into the unambiguous band") {
  CHECK(sim::wrap(33, kVN) == doctest::Approx(-20));
  CHECK(sim::wrap(-30, kVN) == doctest::Approx(23));
  CHECK(sim::wrap(-60, kVN) == doctest::Approx(-7));
  CHECK(sim::wrap(26.5, kVN) == doctest::Approx(26.5));
  CHECK(sim::wrap(-26.5, kVN) == doctest::Approx(26.5));
}

TEST_CASE("dealias examples") {
  DealiasResult d = dealias(-20, 31, kVN);
  CHECK(d.v_r == 33);
  CHECK(d.n == 1);
  d = dealias(23, -30, kVN);
  CHECK(d.v_r == -30);
  CHECK(d.n == -1);
  d = dealias(-7, -58, kVN);
  CHECK(d.v_r == -60);
  CHECK(d.n == -1);
  CHECK(dealias(5, 4, kVN).n == 0);
  CHECK_THROWS_AS(dealias(30, 0, kVN), AliasDomainError);
}

TEST_CASE("dealias inverts wrap near the prediction") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> vr(-4 * kVN, 4 * kVN);
  std::uniform_real_distribution<double> off(-0.95 * kVN, 0.95 * kVN);
  for (int i = 0; i < 20000; ++i) {
    const double v = vr(rng);
    const double ve = v + off(rng);
    const DealiasResult d = dealias(sim::wrap(v, kVN), ve, kVN);
    REQUIRE(std::abs(d.v_r - v) <= 1e-12 * std::max(1.0, std::abs(v)));
  }
}

TEST_CASE("gating") {
  const Thresholds th;
  RadarPoint p;
  p.snr = 5.0;
  CHECK(gate_point(p, 0.0, 0.0, th) == GateDecision::LowSNR);
  p.snr = 20.0;
  CHECK(gate_point(p, 0.0, 3.5, th) == GateDecision::Innovation);
  CHECK(gate_point(p, 0.0, 2.5, th) == GateDecision::Accept);
  CHECK(std::string(to_string(GateDecision::Innovation)) == "innovation");
}

TEST_CASE("doppler residual") {
  DopplerFactor f;
  f.sigma = 0.2;
  f.v_r = -10.0;  // truth vx = 10 on boresight
  const DopplerResidual r = doppler_residual(f, moving(11), at_origin());
  CHECK(r.residual == doctest::Approx(5.0));

  // beam at +90 deg only sees lateral velocity
  DopplerFactor side;
  side.azimuth = M_PI / 2;
  side.sigma = 0.2;
  side.v_r = expected_doppler(moving(10, 1), at_origin(), M_PI / 2, 0).value;
  CHECK(std::abs(doppler_residual(side, moving(14, 1), at_origin()).residual) < 1e-12);
  CHECK(doppler_residual(side, moving(10, 1.2), at_origin()).residual == doctest::Approx(1.0));
}

TEST_CASE("doppler residual jacobian") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  const VehicleConfig cfg = validate_config(default_config());
  for (int trial = 0; trial < 100; ++trial) {
    const RadarExtrinsics& ext = cfg.radars[static_cast<std::size_t>(trial % 3)];
    DopplerFactor f;
    f.azimuth = U(rng);
    f.elevation = 0.2 * U(rng);
    f.v_r = 30 * U(rng);
    const VehicleState x = moving(40 + 20 * U(rng), 2 * U(rng), U(rng));
    const DopplerResidual r = doppler_residual(f, x, ext);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x.vec()[j]));
      Vec6 a = x.vec(), b = x.vec();
      a[j] += h;
      b[j] -= h;
      const double fd = (doppler_residual(f, VehicleState::from_vec(0, a), ext).residual -
                         doppler_residual(f, VehicleState::from_vec(0, b), ext).residual) /
                        (2 * h);
      CHECK(std::abs(fd - r.d_state[j]) <= 1e-6 * std::max(1.0, std::abs(r.d_state[j])));
    }
  }
}

TEST_CASE("scan_to_factors inserts a delayed state") {
  VehicleConfig cfg = validate_config(default_config());
  mhe::SlidingWindow w(cfg);
  for (int i = 0; i <= 30; ++i) w.add_imu(ImuSample{i * 0.005, 0.0, 0.0, 0.0});
  for (int k = 0; k <= 10; ++k) w.push_state(k * 0.01);
  for (std::size_t i = 0; i < w.size(); ++i) w.set_state(i, moving(10).vec());
  REQUIRE(w.size() == 11);

  RadarScan scan;
  scan.radar_id = 0;
  scan.t_capture = w.newest().t() - 0.045;  // between grid states
  scan.t_receive = w.newest().t();
  for (double az : {-0.2, 0.0, 0.3}) {
    RadarPoint p;
    p.azimuth = az;
    p.snr = 20;
    p.doppler = expected_doppler(moving(10), cfg.radars[0], az, 0.0).value;
    scan.points.push_back(p);
  }
  RadarPoint weak = scan.points[0];
  weak.snr = 3;
  scan.points.push_back(weak);

  const ScanFactors f = scan_to_factors(scan, w, cfg);
  CHECK(f.factors.size() == 3);
  CHECK(f.rejected_snr == 1);
  CHECK(f.inserted_state);
  CHECK(w.size() == 12);
  CHECK(w.node(f.node_index).t() == doctest::Approx(scan.t_capture));
  CHECK(w.node(f.node_index).doppler.size() == 3);

  // a fully gated scan leaves the window alone
  RadarScan junk = scan;
  junk.t_capture -= 0.012;
  for (auto& p : junk.points) p.snr = 0;
  const ScanFactors g = scan_to_factors(junk, w, cfg);
  CHECK(g.factors.empty());
  CHECK(w.size() == 12);

  RadarScan unknown = scan;
  unknown.radar_id = 7;
  CHECK_THROWS_AS(scan_to_factors(unknown, w, cfg), RangeError);

  RadarScan stale = scan;
  stale.t_capture = -1.0;
  CHECK_THROWS_AS(scan_to_factors(stale, w, cfg), StaleScanError);
}

TEST_CASE("radar ego speed ignores a minority of moving targets") {
  const RadarExtrinsics ext;
  RadarScan scan;
  for (int i = 0; i < 20; ++i) {
    RadarPoint p;
    p.azimuth = -0.8 + 0.08 * i;
    p.doppler = expected_doppler(moving(12, 0.5), ext, p.azimuth, 0.0).value;
    if (i % 5 == 0) p.doppler += 10.0;
    p.snr = 20;
    scan.points.push_back(p);
  }
  CHECK(radar_ego_speed(scan, ext) == doctest::Approx(std::hypot(12.0, 0.5)).epsilon(0.02));
  CHECK(std::isnan(radar_ego_speed(RadarScan{}, ext)));
}
