#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gripest/config.hpp"
#include "gripest/metrics.hpp"
#include "gripest/sim/maneuver.hpp"
#include "gripest/sim/sensors.hpp"
#include "gripest/sim/truth.hpp"

namespace gripest::sim {

struct ScenarioResult {
  std::vector<SensorEvent> log;      // ordered by receive time
  std::vector<TruthRecord> truth;    // on the estimator's 10 ms grid
  std::vector<TruthState> trajectory;  // full-rate truth
};

/// Simulates the script and synthesises every sensor stream: IMU, steering
/// and reference velocity at fixed rates, and each radar on its own
/// staggered trigger with capture-to-arrival latency.
ScenarioResult run_scenario(const ManeuverScript& script, const TireParamSet& P_truth,
                            const NoiseConfig& noise, const VehicleConfig& cfg);

/// A named, fully specified simulation case.
struct Preset {
  std::string name;
  ManeuverScript script;
  TireParamSet truth_params;
  NoiseConfig noise;
  VehicleConfig estimator_config;  // tire_init randomised for the fitting lap
  double cornering_start = -1.0;   // s, first steering input
};

std::vector<std::string> preset_names();

/// Throws UsageError for an unknown name.
Preset make_preset(const std::string& name, const VehicleConfig& cfg, std::uint64_t seed);

/// Uniform draw around `truth`: B, C, D within +/-35 %, E in [-1, 0.6],
/// shifts zero, clamped to the configured box.
TireParamSet randomized_init(const TireParamSet& truth, const ParamBounds& bounds,
                             std::uint64_t seed);

void write_log(std::ostream& out, const std::vector<SensorEvent>& log);

}  // namespace gripest::sim
