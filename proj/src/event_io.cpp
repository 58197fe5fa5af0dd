#include "gripest/event_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <json.hpp>

#include "gripest/errors.hpp"

namespace gripest {

using nlohmann::json;

double round_to_microseconds(double t) { return std::round(t * 1e6) / 1e6; }

namespace {

double finite_number(const json& value, const char* field) {
  if (!value.is_number()) throw SchemaError(std::string("field '") + field + "' must be a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) throw RangeError(std::string("field '") + field + "' is not finite");
  return v;
}

double required(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw SchemaError(std::string("missing required field '") + field + "'");
  return finite_number(*it, field);
}

std::optional<double> optional_field(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return finite_number(*it, field);
}

double timestamp(const json& obj, const char* field) {
  return round_to_microseconds(required(obj, field));
}

RadarScan parse_radar(const json& obj) {
  RadarScan scan;
  auto id = obj.find("radar_id");
  if (id == obj.end()) throw SchemaError("missing required field 'radar_id'");
  if (!id->is_number_integer()) throw SchemaError("field 'radar_id' must be an integer");
  scan.radar_id = id->get<int>();
  scan.t_capture = timestamp(obj, "t_capture");
  scan.t_receive = timestamp(obj, "t_receive");
  auto pts = obj.find("points");
  if (pts == obj.end()) throw SchemaError("missing required field 'points'");
  if (!pts->is_array()) throw SchemaError("field 'points' must be an array");
  scan.points.reserve(pts->size());
  for (const auto& p : *pts) {
    if (!p.is_array() || p.size() != 5) {
      throw SchemaError("radar point must be [range, azimuth, elevation, doppler, snr]");
    }
    RadarPoint point;
    point.range = finite_number(p[0], "points.range");
    point.azimuth = finite_number(p[1], "points.azimuth");
    point.elevation = finite_number(p[2], "points.elevation");
    point.doppler = finite_number(p[3], "points.doppler");
    point.snr = finite_number(p[4], "points.snr");
    if (point.range < 0.0) throw RangeError("radar point range is negative");
    scan.points.push_back(point);
  }
  if (scan.t_receive < scan.t_capture) throw RangeError("radar t_receive precedes t_capture");
  return scan;
}

}  // namespace

SensorEvent parse_event(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  } catch (const json::out_of_range& e) {
    throw RangeError(std::string("number out of range: ") + e.what());
  }
  if (!obj.is_object()) throw SchemaError("record must be a JSON object");
  auto type_it = obj.find("type");
  if (type_it == obj.end() || !type_it->is_string()) throw SchemaError("missing string field 'type'");
  const std::string type = type_it->get<std::string>();

  if (type == "imu") {
    ImuSample s;
    s.t = timestamp(obj, "t");
    s.ax = required(obj, "ax");
    s.ay = required(obj, "ay");
    s.r = required(obj, "r");
    s.az = optional_field(obj, "az");
    s.gx = optional_field(obj, "gx");
    s.gy = optional_field(obj, "gy");
    return s;
  }
  if (type == "steering") {
    return SteeringSample{timestamp(obj, "t"), required(obj, "delta")};
  }
  if (type == "radar") {
    return parse_radar(obj);
  }
  if (type == "ref_vel") {
    return ReferenceVelocity{timestamp(obj, "t"), required(obj, "vx_ref"), required(obj, "vy_ref")};
  }
  throw SchemaError("unknown record type '" + type + "'");
}

std::string serialize_event(const SensorEvent& event) {
  json j;
  std::visit(
      [&j](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, ImuSample>) {
          j = {{"type", "imu"}, {"t", e.t}, {"ax", e.ax}, {"ay", e.ay}, {"r", e.r}};
          if (e.az) j["az"] = *e.az;
          if (e.gx) j["gx"] = *e.gx;
          if (e.gy) j["gy"] = *e.gy;
        } else if constexpr (std::is_same_v<T, SteeringSample>) {
          j = {{"type", "steering"}, {"t", e.t}, {"delta", e.delta}};
        } else if constexpr (std::is_same_v<T, RadarScan>) {
          json pts = json::array();
          for (const auto& p : e.points) {
            pts.push_back(json::array({p.range, p.azimuth, p.elevation, p.doppler, p.snr}));
          }
          j = {{"type", "radar"},
               {"radar_id", e.radar_id},
               {"t_capture", e.t_capture},
               {"t_receive", e.t_receive},
               {"points", std::move(pts)}};
        } else {
          j = {{"type", "ref_vel"}, {"t", e.t}, {"vx_ref", e.vx_ref}, {"vy_ref", e.vy_ref}};
        }
      },
      event);
  return j.dump();
}

std::vector<SensorEvent> read_log(std::istream& in) {
  std::vector<SensorEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(parse_event(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const RangeError& e) {
      throw RangeError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return events;
}

std::vector<SensorEvent> read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open log file '" + path + "'");
  return read_log(in);
}

}  // namespace gripest
