#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "gripest/config.hpp"
#include "gripest/errors.hpp"
#include "gripest/event_io.hpp"

using namespace gripest;

TEST_CASE("parse imu record") {
  const SensorEvent e = parse_event(R"({"type":"imu","t":0.0,"ax":0.0,"ay":0.0,"r":0.0})");
  REQUIRE(std::holds_alternative<ImuSample>(e));
  const auto& s = std::get<ImuSample>(e);
  CHECK(s.t == 0.0);
  CHECK(s.ax == 0.0);
  CHECK_FALSE(s.az.has_value());
}

TEST_CASE("parse radar record keeps latency") {
  const SensorEvent e = parse_event(
      R"({"type":"radar","radar_id":0,"t_capture":1.000,"t_receive":1.090,)"
      R"("points":[[12.0,0.1,0.0,-3.5,20.0],[8.0,-0.2,0.01,-2.0,9.0]]})");
  REQUIRE(std::holds_alternative<RadarScan>(e));
  const auto& s = std::get<RadarScan>(e);
  CHECK(s.t_receive - s.t_capture == doctest::Approx(0.090).epsilon(1e-12));
  REQUIRE(s.points.size() == 2);
  CHECK(s.points[1].snr == 9.0);
  CHECK(receive_time(e) == 1.090);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_event(R"({"type":"imu","t":"x"})"), SchemaError);
  CHECK_THROWS_AS(parse_event(R"({"type":"imu","t":0.0,"ax":0.0,"ay":0.0)"), ParseError);
  CHECK_THROWS_AS(parse_event(R"({"type":"imu","t":0.0,"ax":0.0,"ay":0.0})"), SchemaError);
  CHECK_THROWS_AS(parse_event(R"({"type":"lidar","t":0.0})"), SchemaError);
  CHECK_THROWS_AS(parse_event(R"({"type":"radar","radar_id":0,"t_capture":1.0,"t_receive":0.9,"points":[]})"),
                  RangeError);
  CHECK_THROWS_AS(parse_event(R"({"type":"steering","t":0.0,"delta":1e999})"), RangeError);
}

TEST_CASE("unknown fields are ignored") {
  const SensorEvent e = parse_event(R"({"type":"steering","t":0.5,"delta":0.1,"source":"col"})");
  CHECK(std::get<SteeringSample>(e).delta == 0.1);
}

TEST_CASE("serialize round trip") {
  ImuSample imu{1.234567, 0.5, -0.25, 0.01, 9.81, 0.001, -0.002};
  RadarScan scan{2, 3.0, 3.085, {{10.0, 0.2, -0.05, 12.5, 22.0}}};
  const std::vector<SensorEvent> events = {imu, SteeringSample{0.1, -0.05}, scan,
                                           ReferenceVelocity{4.0, 20.0, 0.3}};
  for (const auto& e : events) {
    const std::string line = serialize_event(e);
    CHECK(serialize_event(parse_event(line)) == line);
  }
  const auto back = std::get<RadarScan>(parse_event(serialize_event(scan)));
  CHECK(back.radar_id == 2);
  CHECK(back.points[0].doppler == 12.5);
  const auto imu2 = std::get<ImuSample>(parse_event(serialize_event(imu)));
  CHECK(*imu2.az == 9.81);
}

TEST_CASE("read_log reports the failing line") {
  std::istringstream in(
      "{\"type\":\"steering\",\"t\":0.0,\"delta\":0.0}\n\n{\"type\":\"imu\",\"t\":0.0}\n");
  try {
    read_log(in);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("timestamps keep microsecond resolution") {
  CHECK(round_to_microseconds(0.1234564) == 0.123456);
  CHECK(round_to_microseconds(0.1234566) == 0.123457);
  const auto s = std::get<SteeringSample>(parse_event(R"({"type":"steering","t":12.3456789,"delta":0})"));
  CHECK(s.t == 12.345679);
}

TEST_CASE("validate_config") {
  const VehicleConfig ok = validate_config(default_config());
  CHECK(ok.m == 800.0);
  CHECK(ok.radars.size() == 3);

  VehicleConfig bad = default_config();
  bad.lr = -1.5;
  try {
    validate_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "lr");
  }

  bad = default_config();
  bad.radars[0].rotation = Mat3::Identity() * std::cbrt(0.5);
  try {
    validate_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "radars[0].rotation");
  }

  bad = default_config();
  bad.thresholds.dTw = 0.005;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = default_config();
  bad.bounds.P_min[2] = 5.0;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = default_config();
  bad.covariances.Sigma_w[1] = 0.0;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
}

TEST_CASE("nearly orthonormal rotation is repaired") {
  VehicleConfig cfg = default_config();
  cfg.radars[1].rotation(0, 1) += 5e-7;
  const VehicleConfig v = validate_config(cfg);
  const Mat3& R = v.radars[1].rotation;
  CHECK((R.transpose() * R - Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("config json round trip") {
  VehicleConfig cfg = default_config();
  cfg.m = 750.0;
  cfg.thresholds.T_stop = 0.8;
  cfg.tire_init.front.B = 11.0;
  const VehicleConfig back = config_from_json_text(config_to_json_text(cfg));
  CHECK(back.m == 750.0);
  CHECK(back.thresholds.T_stop == 0.8);
  CHECK(back.tire_init.front.B == 11.0);
  CHECK(config_to_json_text(back) == config_to_json_text(validate_config(cfg)));
}

TEST_CASE("config json partial and unknown keys") {
  const VehicleConfig c = config_from_json_text(R"({"m": 900})");
  CHECK(c.m == 900.0);
  CHECK(c.lf == default_config().lf);
  CHECK_THROWS_AS(config_from_json_text(R"({"mass": 900})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"m": -1})"), ConfigError);
  CHECK_THROWS(config_from_json_text("{"));
}
