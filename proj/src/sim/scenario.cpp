#include "gripest/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gripest/errors.hpp"
#include "gripest/event_io.hpp"

namespace gripest::sim {

namespace {

// Tie-break for events arriving at the same instant: inputs first, so that
// a radar scan sees every IMU sample up to its arrival.
int type_rank(const SensorEvent& e) {
  if (std::holds_alternative<SteeringSample>(e)) return 0;
  if (std::holds_alternative<ImuSample>(e)) return 1;
  if (std::holds_alternative<ReferenceVelocity>(e)) return 2;
  return 3;
}

long stride_for(double rate, double dt) { return std::max<long>(1, std::lround(1.0 / (rate * dt))); }

}  // namespace

ScenarioResult run_scenario(const ManeuverScript& script, const TireParamSet& P_truth,
                            const NoiseConfig& noise, const VehicleConfig& cfg) {
  constexpr double kDtSim = 1e-3;
  ScenarioResult out;
  out.trajectory = simulate_truth(script, P_truth, cfg, kDtSim);
  const auto& traj = out.trajectory;

  // Independent streams per sensor so that changing one rate or point
  // count does not reshuffle the others.
  Rng imu_rng(noise.seed);
  Rng radar_rng(noise.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<SensorEvent> events;
  for (const ImuSample& s : gen_imu(traj, noise.imu, cfg.g, imu_rng)) events.emplace_back(s);

  const long steer_stride = stride_for(noise.steering_rate, kDtSim);
  const long ref_stride = stride_for(noise.reference_rate, kDtSim);
  const long grid_stride = stride_for(1.0 / cfg.thresholds.dt, kDtSim);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto kl = static_cast<long>(k);
    const TruthState& s = traj[k];
    const double t = round_to_microseconds(s.t);
    if (kl % steer_stride == 0) events.emplace_back(SteeringSample{t, s.delta * cfg.steering_ratio});
    if (kl % ref_stride == 0) events.emplace_back(ReferenceVelocity{t, s.vx, s.vy});
    if (kl % grid_stride == 0) {
      TruthRecord rec = s.record();
      rec.t = t;
      out.truth.push_back(rec);
    }
  }

  const long period = stride_for(1.0 / noise.radar.period, kDtSim);
  const long stagger = std::lround(noise.radar.stagger / kDtSim);
  for (std::size_t id = 0; id < cfg.radars.size(); ++id) {
    for (auto k = static_cast<long>(id) * stagger; k < static_cast<long>(traj.size());
         k += period) {
      events.emplace_back(gen_radar_scan(traj[static_cast<std::size_t>(k)], static_cast<int>(id),
                                         cfg.radars[id], cfg.fov, noise.radar, radar_rng));
    }
  }

  std::stable_sort(events.begin(), events.end(), [](const SensorEvent& a, const SensorEvent& b) {
    const double ta = receive_time(a), tb = receive_time(b);
    if (ta != tb) return ta < tb;
    return type_rank(a) < type_rank(b);
  });
  out.log = std::move(events);
  return out;
}

std::vector<std::string> preset_names() {
  return {"dlc65",       "constant_radius", "slalom", "straight_brake_turn",
          "fitting_lap", "spin",            "standstill"};
}

TireParamSet randomized_init(const TireParamSet& truth, const ParamBounds& bounds,
                             std::uint64_t seed) {
  Rng rng(seed ^ 0x5851f42d4c957f2dULL);
  std::uniform_real_distribution<double> scale(0.65, 1.35);
  std::uniform_real_distribution<double> curvature(-1.0, 0.6);
  auto draw = [&](const PacejkaAxleParams& p) {
    PacejkaAxleParams q = p;
    q.B = p.B * scale(rng);
    q.C = p.C * scale(rng);
    q.D = p.D * scale(rng);
    q.E = curvature(rng);
    q.Sh = 0.0;
    q.Sv = 0.0;
    return PacejkaAxleParams::from_vec(q.vec().cwiseMax(bounds.P_min).cwiseMin(bounds.P_max));
  };
  TireParamSet out;
  out.front = draw(truth.front);
  out.rear = draw(truth.rear);
  return out;
}

Preset make_preset(const std::string& name, const VehicleConfig& cfg, std::uint64_t seed) {
  Preset p;
  p.name = name;
  p.truth_params = nominal_tire_params();
  p.noise.seed = seed;
  p.estimator_config = cfg;
  const TireParamSet& P = p.truth_params;
  if (name == "dlc65") {
    p.script = double_lane_change(65.0, P, cfg);
  } else if (name == "constant_radius") {
    p.script = constant_radius(20.0, 8.0, 8.0, P, cfg);
  } else if (name == "slalom") {
    p.script = slalom(25.0, 6.0, 2.0, 4, P, cfg);
  } else if (name == "straight_brake_turn") {
    p.script = straight_brake_turn(P, cfg);
  } else if (name == "fitting_lap") {
    p.script = fitting_lap(P, cfg);
    p.estimator_config.tire_init = randomized_init(P, cfg.bounds, seed);
  } else if (name == "spin") {
    p.truth_params.front.D = 1.0;
    p.truth_params.rear.D = 0.8;
    p.script = spin(p.truth_params, cfg);
  } else if (name == "standstill") {
    p.script = standstill(6.0);
    p.noise.imu.bias = Vec3(0.15, 0.15, 0.008);
  } else {
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw UsageError("unknown scenario '" + name + "'; available: " + list);
  }
  p.cornering_start = p.script.segment_start("turn_in");
  if (p.cornering_start < 0.0) p.cornering_start = p.script.segment_start("lane_change");
  if (p.cornering_start < 0.0) p.cornering_start = p.script.segment_start("slalom");
  if (p.cornering_start < 0.0) p.cornering_start = p.script.segment_start("steer");
  return p;
}

void write_log(std::ostream& out, const std::vector<SensorEvent>& log) {
  for (const SensorEvent& e : log) out << serialize_event(e) << '\n';
}

}  // namespace gripest::sim
