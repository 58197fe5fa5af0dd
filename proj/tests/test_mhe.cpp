#include <doctest.h>

#include <cmath>
#include <random>

#include "gripest/errors.hpp"
#include "gripest/mhe/block_solver.hpp"
#include "gripest/mhe/problem.hpp"
#include "gripest/mhe/solver.hpp"
#include "gripest/mhe/window.hpp"
#include "gripest/radar.hpp"
#include "gripest/tire.hpp"

using namespace gripest;
using namespace gripest::mhe;

namespace {

VehicleConfig cfg() { return validate_config(default_config()); }

// Window of `n` grid states driving straight at `vx` with constant
// longitudinal acceleration `ax`, inputs and states exactly consistent.
SlidingWindow straight_window(const VehicleConfig& c, int n, double vx, double ax = 0.0) {
  SlidingWindow w(c);
  for (int i = 0; i <= 2 * n + 2; ++i) w.add_imu(ImuSample{i * 0.005, ax, 0.0, 0.0});
  w.add_steering(SteeringSample{0.0, 0.0});
  for (int k = 0; k < n; ++k) w.push_state(k * 0.01);
  for (int k = 0; k < n; ++k) {
    w.set_state(static_cast<std::size_t>(k), VehicleState{0, vx + ax * k * 0.01, 0, 0, 0, 0, 0}.vec());
    w.node(static_cast<std::size_t>(k)).u = w.input_at(k * 0.01);
    w.node(static_cast<std::size_t>(k)).on_grid = true;
  }
  w.set_prior_state(w.oldest().x);
  return w;
}

void add_exact_scan(SlidingWindow& w, const VehicleConfig& c, std::size_t node, int radar_id) {
  const RadarExtrinsics& ext = c.radars[static_cast<std::size_t>(radar_id)];
  for (double az : {-0.4, -0.1, 0.2, 0.5}) {
    DopplerFactor f;
    f.state_timestamp = w.node(node).t();
    f.azimuth = az;
    f.elevation = 0.02;
    f.v_r = expected_doppler(w.node(node).x, ext, az, 0.02).value;
    f.sigma = c.covariances.sigma_doppler;
    f.radar_id = radar_id;
    w.node(node).doppler.push_back(f);
  }
}

}  // namespace

TEST_CASE("push_state bootstrap and ordering") {
  VehicleConfig c = cfg();
  c.bias_init = Vec3(0.01, 0.02, 0.003);
  SlidingWindow w(c);
  CHECK(w.empty());
  w.push_state(0.0);
  REQUIRE(w.size() == 1);
  CHECK(w.newest().x.vx == 0.0);
  CHECK(w.newest().x.bx == 0.01);
  CHECK(w.newest().x.br == 0.003);
  CHECK_THROWS_AS(w.push_state(0.0), WindowOrderError);
  CHECK_THROWS_AS(w.push_state(-0.01), WindowOrderError);
}

TEST_CASE("push_state propagates through the motion model") {
  const VehicleConfig c = cfg();
  SlidingWindow w(c);
  for (int i = 0; i <= 4; ++i) w.add_imu(ImuSample{i * 0.005, 2.0, 0.0, 0.0});
  w.push_state(0.0);
  w.push_state(0.01);
  CHECK(w.newest().x.vx == doctest::Approx(0.02));
}

TEST_CASE("window span and shift") {
  const VehicleConfig c = cfg();
  SlidingWindow w = straight_window(c, 15, 10.0);
  CHECK(w.span() == doctest::Approx(0.14));
  w.push_state(0.15);
  CHECK(w.span() == doctest::Approx(0.15));
  CHECK(w.shift() == 0);
  w.push_state(0.16);
  w.push_state(0.17);
  CHECK(w.span() == doctest::Approx(0.17));
  CHECK(w.shift() == 2);
  CHECK(w.span() == doctest::Approx(0.15));
  CHECK(w.prior_state().t == doctest::Approx(0.02));
}

TEST_CASE("insert_state splits an interval") {
  const VehicleConfig c = cfg();
  SlidingWindow w = straight_window(c, 10, 10.0, 1.0);
  const std::size_t i = w.insert_state(0.035);
  CHECK(w.size() == 11);
  CHECK(w.node(i).t() == doctest::Approx(0.035));
  CHECK(w.node(i).x.vx == doctest::Approx(10.035).epsilon(1e-9));
  // re-inserting the same time snaps to the existing node
  CHECK(w.insert_state(0.035) == i);
  CHECK(w.size() == 11);
  // beyond the newest state the window extrapolates
  const std::size_t j = w.insert_state(0.095);
  CHECK(j == w.size() - 1);
  CHECK(w.predict_state(0.02).vx == doctest::Approx(10.02).epsilon(1e-9));
  CHECK_THROWS_AS(w.predict_state(-0.5), StaleScanError);
}

TEST_CASE("interval inputs average the IMU") {
  const VehicleConfig c = cfg();
  SlidingWindow w(c);
  w.add_imu(ImuSample{0.000, 1.0, 0.0, 0.0});
  w.add_imu(ImuSample{0.005, 3.0, 0.0, 0.0});
  w.add_imu(ImuSample{0.010, 9.0, 0.0, 0.0});
  w.add_steering(SteeringSample{0.0, 0.02});
  CHECK(w.interval_mean(0.0, 0.01).ax_meas == doctest::Approx(2.0));
  CHECK(w.interval_mean(0.0, 0.01).delta == doctest::Approx(0.02));
  CHECK(w.input_at(0.01).ax_meas == doctest::Approx(6.0));
}

TEST_CASE("cauchy loss") {
  CHECK(cauchy_loss(0.0, 1.0) == 0.0);
  CHECK(cauchy_loss(1e-8, 1.0) == doctest::Approx(1e-8));
  CHECK(cauchy_loss(3.0, 1.0) == doctest::Approx(std::log(4.0)));
  CHECK(cauchy_weight(0.0, 1.0) == 1.0);
  CHECK(cauchy_weight(3.0, 1.0) == doctest::Approx(0.25));
  const double h = 1e-6;
  CHECK((cauchy_loss(2.0 + h, 2.0) - cauchy_loss(2.0 - h, 2.0)) / (2 * h) ==
        doctest::Approx(cauchy_weight(2.0, 2.0)).epsilon(1e-8));
}

TEST_CASE("block arrow solve matches the dense reference") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> N(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 15);
    // random sparse Jacobian with the window's structure
    BlockArrowSystem sys;
    sys.reset(n);
    auto add = [&](const Eigen::MatrixXd& J, const Eigen::VectorXd& r) {
      const Eigen::MatrixXd H = J.transpose() * J;
      const Eigen::VectorXd g = J.transpose() * r;
      for (std::size_t i = 0; i < n; ++i) {
        sys.diag[i] += H.block(6 * static_cast<int>(i), 6 * static_cast<int>(i), 6, 6);
        if (i + 1 < n)
          sys.upper[i] += H.block(6 * static_cast<int>(i), 6 * static_cast<int>(i + 1), 6, 6);
        sys.border[i] += H.block(6 * static_cast<int>(i), 6 * static_cast<int>(n), 6, 12);
        sys.g_state[i] += g.segment(6 * static_cast<int>(i), 6);
      }
      sys.corner += H.bottomRightCorner(12, 12);
      sys.g_param += g.tail(12);
    };
    const int dim = static_cast<int>(6 * n + 12);
    for (std::size_t i = 0; i + 1 < n; ++i) {  // process-like links
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(6, dim);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 12; ++b) J(a, 6 * static_cast<int>(i) + b) = N(rng);
      add(J, Eigen::VectorXd::NullaryExpr(6, [&] { return N(rng); }));
    }
    for (std::size_t i = 0; i < n; ++i) {  // measurement-like factors on (x_i, P)
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4, dim);
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 6; ++b) J(a, 6 * static_cast<int>(i) + b) = N(rng);
        for (int b = 0; b < 12; ++b) J(a, 6 * static_cast<int>(n) + b) = 0.3 * N(rng);
      }
      add(J, Eigen::VectorXd::NullaryExpr(4, [&] { return N(rng); }));
    }
    for (auto& D : sys.diag) D += Mat6::Identity() * 1e-3;
    sys.corner += Mat12::Identity() * 1e-2;

    std::vector<Vec6> dx_fast, dx_ref;
    Vec12 dp_fast, dp_ref;
    REQUIRE(solve_block_arrow(sys, dx_fast, dp_fast));
    REQUIRE(solve_dense_reference(sys, dx_ref, dp_ref));
    for (std::size_t i = 0; i < n; ++i) CHECK((dx_fast[i] - dx_ref[i]).norm() <= 1e-8 * (1 + dx_ref[i].norm()));
    CHECK((dp_fast - dp_ref).norm() <= 1e-8 * (1 + dp_ref.norm()));
    // residual of the normal equations
    Eigen::VectorXd d(dim);
    for (std::size_t i = 0; i < n; ++i) d.segment(6 * static_cast<int>(i), 6) = dx_fast[i];
    d.tail(12) = dp_fast;
    CHECK((sys.dense_hessian() * d + sys.dense_gradient()).norm() <= 1e-8 * sys.dense_gradient().norm());
  }
}

TEST_CASE("block arrow solve reports an indefinite system") {
  BlockArrowSystem sys;
  sys.reset(2);
  sys.diag[0] = -Mat6::Identity();
  sys.diag[1] = Mat6::Identity();
  sys.corner = Mat12::Identity();
  std::vector<Vec6> dx;
  Vec12 dp;
  CHECK_FALSE(solve_block_arrow(sys, dx, dp));
}

TEST_CASE("problem gradient matches the cost") {
  const VehicleConfig c = cfg();
  SlidingWindow w = straight_window(c, 12, 25.0, 0.5);
  for (std::size_t i = 0; i < w.size(); ++i) {
    WindowNode& n = w.node(i);
    n.u.ay_meas = 4.0;
    n.u.delta = 0.02;
  }
  add_exact_scan(w, c, 3, 0);
  add_exact_scan(w, c, 8, 1);
  w.node(2).zupt = ZuptMeasurement{0.01, 0.02, 0.0};
  w.set_prior_params(nominal_tire_params());

  WindowProblem prob(w, c);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N(0, 1);
  std::vector<Vec6> X = prob.initial_states();
  for (auto& x : X) {
    x[kVy] += 0.3 * N(rng);
    x[kR] += 0.05 * N(rng);
    x[kVx] += 0.5 * N(rng);  // large enough for the Cauchy weights to bite
  }
  Vec12 P = nominal_tire_params().vec();
  P[0] *= 1.1;
  P[8] *= 0.9;

  BlockArrowSystem sys;
  const CostBreakdown c0 = prob.linearize(X, P, sys);
  CHECK(c0.total() == doctest::Approx(prob.evaluate(X, P).total()).epsilon(1e-12));
  CHECK(c0[FactorClass::Doppler] > 0.0);
  CHECK(c0[FactorClass::LateralForce] > 0.0);
  CHECK(c0[FactorClass::Zupt] > 0.0);

  const Eigen::VectorXd g = sys.dense_gradient();
  int k = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (int j = 0; j < 6; ++j, ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(X[i][j]));
      auto Xa = X, Xb = X;
      Xa[i][j] += h;
      Xb[i][j] -= h;
      const double fd = (prob.evaluate(Xa, P).total() - prob.evaluate(Xb, P).total()) / (2 * h);
      CHECK(std::abs(fd - g[k]) <= 5e-5 * std::max(1.0, std::abs(g[k])));
    }
  }
  for (int j = 0; j < 12; ++j, ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(P[j]));
    Vec12 Pa = P, Pb = P;
    Pa[j] += h;
    Pb[j] -= h;
    const double fd = (prob.evaluate(X, Pa).total() - prob.evaluate(X, Pb).total()) / (2 * h);
    CHECK(std::abs(fd - g[k]) <= 5e-5 * std::max(1.0, std::abs(g[k])));
  }
}

TEST_CASE("non-finite cost names the factor class") {
  const VehicleConfig c = cfg();
  SlidingWindow w = straight_window(c, 5, 20.0);
  add_exact_scan(w, c, 2, 0);
  w.node(2).doppler[0].v_r = NAN;
  try {
    solve(w, nominal_tire_params(), c);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("doppler") != std::string::npos);
  }
}

TEST_CASE("solve at the optimum stays there") {
  const VehicleConfig c = cfg();
  SlidingWindow w = straight_window(c, 15, 20.0, 1.0);
  add_exact_scan(w, c, 5, 0);
  add_exact_scan(w, c, 12, 2);
  w.set_prior_params(nominal_tire_params());
  const SolveResult r = solve(w, nominal_tire_params(), c);
  CHECK(r.report.initial_cost < 1e-12);
  CHECK(r.report.final_cost <= r.report.initial_cost);
  CHECK(r.report.iterations <= c.solver.max_iterations);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK((r.states[i] - w.node(i).x.vec()).norm() < 1e-9);
}

TEST_CASE("solve reduces cost, honours the cap and the box") {
  const VehicleConfig c = cfg();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> N(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    SlidingWindow w = straight_window(c, 15, 30.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w.node(i).u.ay_meas = 6.0;
      w.node(i).u.delta = 0.03;
    }
    add_exact_scan(w, c, 4, 0);
    add_exact_scan(w, c, 10, 1);
    for (std::size_t i = 0; i < w.size(); ++i) {
      Vec6 x = w.node(i).x.vec();
      x[kVx] += 0.3 * N(rng);
      x[kVy] += 0.1 * N(rng);
      w.set_state(i, x);
    }
    TireParamSet start = nominal_tire_params();
    start.front.D = 10.0;  // outside the box
    start.rear.B = 0.1;
    w.set_prior_params(nominal_tire_params());
    const SolveResult r = solve(w, start, c);
    CHECK(r.report.final_cost <= r.report.initial_cost);
    CHECK(r.report.iterations <= 3);
    const Vec12 p = r.params.vec();
    for (int j = 0; j < 12; ++j) {
      CHECK(p[j] >= c.bounds.P_min[j % 6]);
      CHECK(p[j] <= c.bounds.P_max[j % 6]);
    }
  }
}

TEST_CASE("clamp_to_bounds") {
  const ParamBounds b;
  Vec12 p = Vec12::Constant(100.0);
  p[3] = -100.0;
  const Vec12 q = clamp_to_bounds(p, b);
  CHECK(q[0] == 40.0);
  CHECK(q[3] == -5.0);
  CHECK(q[9] == 1.0);
}
