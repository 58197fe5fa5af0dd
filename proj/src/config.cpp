#include "gripest/config.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "gripest/errors.hpp"

namespace gripest {

using nlohmann::json;

bool VehicleState::finite() const {
  return std::isfinite(t) && vec().allFinite();
}

bool InputSample::finite() const {
  return std::isfinite(t) && std::isfinite(ax_meas) && std::isfinite(ay_meas) &&
         std::isfinite(r_meas) && std::isfinite(delta);
}

double receive_time(const SensorEvent& event) {
  return std::visit(
      [](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, RadarScan>) {
          return e.t_receive;
        } else {
          return e.t;
        }
      },
      event);
}

Mat3 yaw_rotation(double yaw) {
  Mat3 R;
  R << std::cos(yaw), -std::sin(yaw), 0.0, std::sin(yaw), std::cos(yaw), 0.0, 0.0, 0.0, 1.0;
  return R;
}

TireParamSet nominal_tire_params() {
  return {{14.0, 1.5, 1.45, 0.3, 0.0, 0.0}, {15.0, 1.5, 1.5, 0.3, 0.0, 0.0}};
}

VehicleConfig default_config() {
  VehicleConfig cfg;
  constexpr double kPi = 3.14159265358979323846;
  RadarExtrinsics front;
  front.rotation = Mat3::Identity();
  front.translation = Vec3(2.6, 0.0, 0.4);
  RadarExtrinsics left;
  left.rotation = yaw_rotation(kPi / 2.0);
  left.translation = Vec3(0.4, 0.55, 0.5);
  RadarExtrinsics right;
  right.rotation = yaw_rotation(-kPi / 2.0);
  right.translation = Vec3(0.4, -0.55, 0.5);
  cfg.radars = {front, left, right};
  cfg.tire_init = nominal_tire_params();
  return cfg;
}

namespace {

void require(bool ok, const std::string& field, const std::string& what = {}) {
  if (!ok) throw ConfigError(field, what);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

void check_params_in_box(const PacejkaAxleParams& p, const ParamBounds& b, const std::string& name) {
  const Vec6 v = p.vec();
  static const char* kNames[6] = {"B", "C", "D", "E", "Sh", "Sv"};
  for (int i = 0; i < 6; ++i) {
    require(std::isfinite(v[i]) && v[i] >= b.P_min[i] && v[i] <= b.P_max[i],
            name + "." + kNames[i], "outside [P_min, P_max]");
  }
  require(p.B > 0 && p.C > 0 && p.D > 0, name, "B, C and D must be positive");
}

}  // namespace

VehicleConfig validate_config(VehicleConfig cfg) {
  require(positive(cfg.m), "m");
  require(positive(cfg.lf), "lf");
  require(positive(cfg.lr), "lr");
  require(positive(cfg.hg), "hg");
  require(positive(cfg.g), "g");
  require(std::isfinite(cfg.rho) && cfg.rho >= 0.0, "rho");
  require(std::isfinite(cfg.A) && cfg.A >= 0.0, "A");
  require(std::isfinite(cfg.Czf), "Czf");
  require(std::isfinite(cfg.Czr), "Czr");
  require(positive(cfg.Iz), "Iz");
  require(positive(cfg.steering_ratio), "steering_ratio");
  require(positive(cfg.delta_max) && cfg.delta_max < 1.5, "delta_max");

  const auto& th = cfg.thresholds;
  require(positive(th.V_min), "thresholds.V_min");
  require(positive(th.A_min), "thresholds.A_min");
  require(positive(th.T_stop), "thresholds.T_stop");
  require(std::isfinite(th.snr_min), "thresholds.snr_min");
  require(positive(th.dV_r_max), "thresholds.dV_r_max");
  require(positive(th.V_Fy_min), "thresholds.V_Fy_min");
  require(positive(th.dt), "thresholds.dt");
  require(positive(th.dTw), "thresholds.dTw");
  require(th.dTw >= th.dt, "thresholds.dTw", "must be >= dt");
  require(positive(th.latency_max), "thresholds.latency_max");
  require(positive(th.watchdog), "thresholds.watchdog");

  const auto& cov = cfg.covariances;
  auto check_diag = [](const auto& v, const std::string& name) {
    for (int i = 0; i < v.size(); ++i) {
      require(positive(v[i]), name + "[" + std::to_string(i) + "]", "diagonal must be > 0");
    }
  };
  check_diag(cov.Sigma_x0, "covariances.Sigma_x0");
  check_diag(cov.Sigma_P, "covariances.Sigma_P");
  check_diag(cov.Sigma_w, "covariances.Sigma_w");
  check_diag(cov.Sigma_zv, "covariances.Sigma_zv");
  check_diag(cov.Sigma_Fy, "covariances.Sigma_Fy");
  require(positive(cov.sigma_doppler), "covariances.sigma_doppler");
  require(positive(cov.cauchy_scale), "covariances.cauchy_scale");

  for (int i = 0; i < 6; ++i) {
    require(std::isfinite(cfg.bounds.P_min[i]) && std::isfinite(cfg.bounds.P_max[i]) &&
                cfg.bounds.P_min[i] <= cfg.bounds.P_max[i],
            "bounds.P_min[" + std::to_string(i) + "]", "P_min must not exceed P_max");
  }
  check_params_in_box(cfg.tire_init.front, cfg.bounds, "tire_init.front");
  check_params_in_box(cfg.tire_init.rear, cfg.bounds, "tire_init.rear");
  require(cfg.bias_init.allFinite(), "bias_init");

  require(positive(cfg.fov.azimuth_max), "fov.azimuth_max");
  require(positive(cfg.fov.elevation_max), "fov.elevation_max");

  const auto& s = cfg.solver;
  require(s.max_iterations >= 1, "solver.max_iterations");
  require(s.max_time > 0.0, "solver.max_time");
  require(positive(s.lm_lambda_init), "solver.lm_lambda_init");
  require(s.gradient_tol >= 0.0, "solver.gradient_tol");
  require(s.step_tol >= 0.0, "solver.step_tol");

  for (std::size_t i = 0; i < cfg.radars.size(); ++i) {
    auto& ext = cfg.radars[i];
    const std::string base = "radars[" + std::to_string(i) + "]";
    require(positive(ext.nyquist), base + ".nyquist");
    require(ext.translation.allFinite(), base + ".translation");
    require(ext.rotation.allFinite(), base + ".rotation");
    const double err = (ext.rotation.transpose() * ext.rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    require(err <= 1e-6 && ext.rotation.determinant() > 0.0, base + ".rotation",
            "not a proper rotation matrix");
    if (err > 1e-9) {
      Eigen::JacobiSVD<Mat3> svd(ext.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
      ext.rotation = svd.matrixU() * svd.matrixV().transpose();
    }
  }
  return cfg;
}

// JSON mapping ---------------------------------------------------------------

namespace {

template <typename Vec>
json vec_to_json(const Vec& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

json params_to_json(const PacejkaAxleParams& p) { return vec_to_json(p.vec()); }

template <int N>
Eigen::Matrix<double, N, 1> vec_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
    throw ConfigError(field, "expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    if (!j[i].is_number()) throw ConfigError(field, "expected numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

}  // namespace

VehicleConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", e.what());
  }
  VehicleConfig cfg = default_config();
  reject_unknown(j,
                 {"m", "lf", "lr", "hg", "g", "rho", "A", "Czf", "Czr", "Iz", "steering_ratio",
                  "delta_max", "radars", "fov", "thresholds", "covariances", "bounds", "tire_init",
                  "bias_init", "solver"},
                 "");
  auto scalar = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = number(j[key], key);
  };
  scalar("m", cfg.m);
  scalar("lf", cfg.lf);
  scalar("lr", cfg.lr);
  scalar("hg", cfg.hg);
  scalar("g", cfg.g);
  scalar("rho", cfg.rho);
  scalar("A", cfg.A);
  scalar("Czf", cfg.Czf);
  scalar("Czr", cfg.Czr);
  scalar("Iz", cfg.Iz);
  scalar("steering_ratio", cfg.steering_ratio);
  scalar("delta_max", cfg.delta_max);

  if (j.contains("radars")) {
    const auto& arr = j["radars"];
    if (!arr.is_array()) throw ConfigError("radars", "expected an array");
    cfg.radars.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string base = "radars[" + std::to_string(i) + "]";
      reject_unknown(arr[i], {"rotation", "translation", "nyquist", "yaw"}, base);
      RadarExtrinsics ext;
      if (arr[i].contains("rotation") && arr[i].contains("yaw")) {
        throw ConfigError(base, "give either rotation or yaw, not both");
      }
      if (arr[i].contains("rotation")) {
        const auto& rot = arr[i]["rotation"];
        if (!rot.is_array() || rot.size() != 3) throw ConfigError(base + ".rotation", "expected 3x3");
        for (int r = 0; r < 3; ++r) {
          ext.rotation.row(r) = vec_from_json<3>(rot[r], base + ".rotation").transpose();
        }
      } else if (arr[i].contains("yaw")) {
        ext.rotation = yaw_rotation(number(arr[i]["yaw"], base + ".yaw"));
      }
      if (arr[i].contains("translation")) {
        ext.translation = vec_from_json<3>(arr[i]["translation"], base + ".translation");
      }
      if (arr[i].contains("nyquist")) ext.nyquist = number(arr[i]["nyquist"], base + ".nyquist");
      cfg.radars.push_back(ext);
    }
  }

  if (j.contains("fov")) {
    const auto& f = j["fov"];
    reject_unknown(f, {"azimuth_max", "elevation_max"}, "fov");
    if (f.contains("azimuth_max")) cfg.fov.azimuth_max = number(f["azimuth_max"], "fov.azimuth_max");
    if (f.contains("elevation_max")) {
      cfg.fov.elevation_max = number(f["elevation_max"], "fov.elevation_max");
    }
  }

  if (j.contains("thresholds")) {
    const auto& t = j["thresholds"];
    reject_unknown(t,
                   {"V_min", "A_min", "T_stop", "snr_min", "dV_r_max", "V_Fy_min", "dTw", "dt",
                    "latency_max", "watchdog"},
                   "thresholds");
    auto th = [&](const char* key, double& dst) {
      if (t.contains(key)) dst = number(t[key], std::string("thresholds.") + key);
    };
    th("V_min", cfg.thresholds.V_min);
    th("A_min", cfg.thresholds.A_min);
    th("T_stop", cfg.thresholds.T_stop);
    th("snr_min", cfg.thresholds.snr_min);
    th("dV_r_max", cfg.thresholds.dV_r_max);
    th("V_Fy_min", cfg.thresholds.V_Fy_min);
    th("dTw", cfg.thresholds.dTw);
    th("dt", cfg.thresholds.dt);
    th("latency_max", cfg.thresholds.latency_max);
    th("watchdog", cfg.thresholds.watchdog);
  }

  if (j.contains("covariances")) {
    const auto& c = j["covariances"];
    reject_unknown(c,
                   {"Sigma_x0", "Sigma_P", "Sigma_w", "Sigma_zv", "sigma_doppler", "Sigma_Fy",
                    "cauchy_scale"},
                   "covariances");
    auto& cov = cfg.covariances;
    if (c.contains("Sigma_x0")) cov.Sigma_x0 = vec_from_json<6>(c["Sigma_x0"], "covariances.Sigma_x0");
    if (c.contains("Sigma_P")) cov.Sigma_P = vec_from_json<12>(c["Sigma_P"], "covariances.Sigma_P");
    if (c.contains("Sigma_w")) cov.Sigma_w = vec_from_json<6>(c["Sigma_w"], "covariances.Sigma_w");
    if (c.contains("Sigma_zv")) cov.Sigma_zv = vec_from_json<6>(c["Sigma_zv"], "covariances.Sigma_zv");
    if (c.contains("Sigma_Fy")) cov.Sigma_Fy = vec_from_json<2>(c["Sigma_Fy"], "covariances.Sigma_Fy");
    if (c.contains("sigma_doppler")) {
      cov.sigma_doppler = number(c["sigma_doppler"], "covariances.sigma_doppler");
    }
    if (c.contains("cauchy_scale")) cov.cauchy_scale = number(c["cauchy_scale"], "covariances.cauchy_scale");
  }

  if (j.contains("bounds")) {
    const auto& b = j["bounds"];
    reject_unknown(b, {"P_min", "P_max"}, "bounds");
    if (b.contains("P_min")) cfg.bounds.P_min = vec_from_json<6>(b["P_min"], "bounds.P_min");
    if (b.contains("P_max")) cfg.bounds.P_max = vec_from_json<6>(b["P_max"], "bounds.P_max");
  }

  if (j.contains("tire_init")) {
    const auto& t = j["tire_init"];
    reject_unknown(t, {"front", "rear"}, "tire_init");
    if (t.contains("front")) {
      cfg.tire_init.front = PacejkaAxleParams::from_vec(vec_from_json<6>(t["front"], "tire_init.front"));
    }
    if (t.contains("rear")) {
      cfg.tire_init.rear = PacejkaAxleParams::from_vec(vec_from_json<6>(t["rear"], "tire_init.rear"));
    }
  }
  if (j.contains("bias_init")) cfg.bias_init = vec_from_json<3>(j["bias_init"], "bias_init");

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    reject_unknown(s, {"max_iterations", "max_time", "lm_lambda_init", "gradient_tol", "step_tol"},
                   "solver");
    if (s.contains("max_iterations")) {
      if (!s["max_iterations"].is_number_integer()) {
        throw ConfigError("solver.max_iterations", "expected an integer");
      }
      cfg.solver.max_iterations = s["max_iterations"].get<int>();
    }
    if (s.contains("max_time")) cfg.solver.max_time = number(s["max_time"], "solver.max_time");
    if (s.contains("lm_lambda_init")) {
      cfg.solver.lm_lambda_init = number(s["lm_lambda_init"], "solver.lm_lambda_init");
    }
    if (s.contains("gradient_tol")) cfg.solver.gradient_tol = number(s["gradient_tol"], "solver.gradient_tol");
    if (s.contains("step_tol")) cfg.solver.step_tol = number(s["step_tol"], "solver.step_tol");
  }
  return validate_config(cfg);
}

VehicleConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return validate_config(config_from_json_text(ss.str()));
}

std::string config_to_json_text(const VehicleConfig& cfg) {
  json j;
  j["m"] = cfg.m;
  j["lf"] = cfg.lf;
  j["lr"] = cfg.lr;
  j["hg"] = cfg.hg;
  j["g"] = cfg.g;
  j["rho"] = cfg.rho;
  j["A"] = cfg.A;
  j["Czf"] = cfg.Czf;
  j["Czr"] = cfg.Czr;
  j["Iz"] = cfg.Iz;
  j["steering_ratio"] = cfg.steering_ratio;
  j["delta_max"] = cfg.delta_max;
  j["radars"] = json::array();
  for (const auto& ext : cfg.radars) {
    json r;
    r["rotation"] = json::array();
    for (int i = 0; i < 3; ++i) r["rotation"].push_back(vec_to_json(Vec3(ext.rotation.row(i).transpose())));
    r["translation"] = vec_to_json(ext.translation);
    r["nyquist"] = ext.nyquist;
    j["radars"].push_back(r);
  }
  j["fov"] = {{"azimuth_max", cfg.fov.azimuth_max}, {"elevation_max", cfg.fov.elevation_max}};
  const auto& th = cfg.thresholds;
  j["thresholds"] = {{"V_min", th.V_min},       {"A_min", th.A_min},     {"T_stop", th.T_stop},
                     {"snr_min", th.snr_min},   {"dV_r_max", th.dV_r_max}, {"V_Fy_min", th.V_Fy_min},
                     {"dTw", th.dTw},           {"dt", th.dt},           {"latency_max", th.latency_max},
                     {"watchdog", th.watchdog}};
  const auto& c = cfg.covariances;
  j["covariances"] = {{"Sigma_x0", vec_to_json(c.Sigma_x0)},
                      {"Sigma_P", vec_to_json(c.Sigma_P)},
                      {"Sigma_w", vec_to_json(c.Sigma_w)},
                      {"Sigma_zv", vec_to_json(c.Sigma_zv)},
                      {"sigma_doppler", c.sigma_doppler},
                      {"Sigma_Fy", vec_to_json(c.Sigma_Fy)},
                      {"cauchy_scale", c.cauchy_scale}};
  j["bounds"] = {{"P_min", vec_to_json(cfg.bounds.P_min)}, {"P_max", vec_to_json(cfg.bounds.P_max)}};
  j["tire_init"] = {{"front", params_to_json(cfg.tire_init.front)},
                    {"rear", params_to_json(cfg.tire_init.rear)}};
  j["bias_init"] = vec_to_json(cfg.bias_init);
  const auto& s = cfg.solver;
  j["solver"] = {{"max_iterations", s.max_iterations},
                 {"max_time", s.max_time},
                 {"lm_lambda_init", s.lm_lambda_init},
                 {"gradient_tol", s.gradient_tol},
                 {"step_tol", s.step_tol}};
  return j.dump(2);
}

}  // namespace gripest
