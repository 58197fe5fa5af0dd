#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gripest/errors.hpp"
#include "gripest/metrics.hpp"
#include "gripest/output.hpp"

using namespace gripest;

namespace {

VehicleConfig cfg() { return validate_config(default_config()); }

}  // namespace

TEST_CASE("output row below the gate leaves slip and force empty") {
  const VehicleConfig c = cfg();
  const OutputRow slow = make_output_row({0.5, 2.0, 0.1, 0.0, 0, 0, 0}, {}, nominal_tire_params(), c);
  CHECK_FALSE(slow.alpha_f.has_value());
  CHECK_FALSE(slow.Fyf.has_value());
  CHECK(slow.BCD_f == doctest::Approx(14.0 * 1.5 * 1.45));

  InputSample u;
  u.ay_meas = 5.0;
  const OutputRow fast = make_output_row({1.0, 30.0, -0.2, 0.05, 0, 0, 0}, u, nominal_tire_params(), c);
  REQUIRE(fast.alpha_f.has_value());
  CHECK(*fast.beta == doctest::Approx(std::atan2(-0.2, 30.0)));
}

TEST_CASE("estimate csv round trip") {
  const VehicleConfig c = cfg();
  std::vector<OutputRow> rows;
  rows.push_back(make_output_row({0.0, 0.0, 0.0, 0.0, 0.01, 0, 0}, {}, nominal_tire_params(), c));
  rows.push_back(make_output_row({0.01, 25.0, 0.3, 0.1, 0.01, 0, 0}, {}, nominal_tire_params(), c));
  std::stringstream ss;
  write_estimate_csv(ss, rows);
  const std::string text = ss.str();
  CHECK(text.rfind(std::string(kEstimateCsvHeader) + "\n", 0) == 0);
  CHECK(text.find("0.000000,0,0,0,0.01,0,0,,,,,") != std::string::npos);

  const auto back = read_estimate_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].vx == 25.0);
  CHECK_FALSE(back[0].alpha_f.has_value());
  CHECK(*back[1].alpha_f == doctest::Approx(*rows[1].alpha_f).epsilon(1e-8));
}

TEST_CASE("csv parsing errors") {
  std::istringstream bad("t,vx\n0.0,abc\n");
  CHECK_THROWS_AS(read_csv_table(bad), ParseError);
  std::istringstream wrong("a,b\n1,2\n");
  CHECK_THROWS(read_estimate_csv(wrong));
}

TEST_CASE("timing stats") {
  const TimingStats s = timing_stats({4, 1, 3, 2});
  CHECK(s.mean == 2.5);
  CHECK(s.p50 == 2.0);
  CHECK(s.max == 4.0);
  CHECK(s.count == 4);
  CHECK(timing_stats({}).count == 0);
}

TEST_CASE("metrics align by time") {
  const VehicleConfig c = cfg();
  std::vector<TruthRecord> truth;
  std::vector<EstimateRecord> est;
  for (int k = 0; k < 100; ++k) {
    const double t = k * 0.01;
    truth.push_back({t, 20.0, 0.5, 0.1, 0, 0, 0, 1000, 1200, 0.01, 0.02});
    EstimateRecord e;
    e.t = t + 0.001;
    e.vx = 20.1;
    e.vy = k == 50 ? 0.8 : 0.5;
    e.alpha_f = 0.01;
    e.alpha_r = 0.02;
    e.Fyf = 1100;
    e.Fyr = 1200;
    est.push_back(e);
  }
  const MetricsReport m = compute_metrics(est, truth, c);
  CHECK(m.aligned_rows == 100);
  CHECK(m.vx.max_abs == doctest::Approx(0.1));
  CHECK(m.vx.rmse == doctest::Approx(0.1));
  CHECK(m.vy.max_abs == doctest::Approx(0.3));
  CHECK(m.Fyf.rmse == doctest::Approx(100.0));
  CHECK(m.gated_rows == 100);

  std::vector<TruthRecord> far = truth;
  for (auto& r : far) r.t += 100.0;
  CHECK_THROWS_AS(compute_metrics(est, far, c), AlignmentError);

  const std::string j = metrics_to_json(m);
  CHECK(j.find("\"vy\"") != std::string::npos);
  CHECK(metrics_table(m).find("alpha_f") != std::string::npos);
}

TEST_CASE("truth csv round trip") {
  std::vector<TruthRecord> rows = {{0.0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {0.01, 1.5, 0, 0, 0, 0, 0, 0, 0, 0, 0}};
  std::stringstream ss;
  write_truth_csv(ss, rows);
  const auto back = read_truth_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].alpha_r == 10.0);
  CHECK(back[1].vx == 1.5);
}

TEST_CASE("normalized curve rmse") {
  const PacejkaAxleParams p{14, 1.5, 1.45, 0.3, 0, 0};
  CHECK(normalized_curve_rmse(p, p, 0.1) == 0.0);
  PacejkaAxleParams q = p;
  q.D *= 1.1;
  const double e = normalized_curve_rmse(q, p, 0.1);
  CHECK(e > 0.0);
  CHECK(e < 0.1);
}
