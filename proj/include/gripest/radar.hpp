#pragma once

#include <vector>

#include "gripest/config.hpp"
#include "gripest/types.hpp"

namespace gripest {

namespace mhe {
class SlidingWindow;
}

/// Unit bearing (cos el cos az, cos el sin az, sin el) in the radar frame.
Vec3 bearing_vector(double azimuth, double elevation);

struct DopplerPrediction {
  double value = 0.0;      // expected Doppler (m/s)
  Vec3 d_state = Vec3::Zero();  // d value / d (vx, vy, r)
};

/// Doppler of a static target seen from a radar on the moving body:
/// v_e = -b . R^T ((vx, vy, 0) + (0, 0, r) x t). Vertical motion and roll/pitch
/// rates are ignored.
DopplerPrediction expected_doppler(const VehicleState& x, const RadarExtrinsics& ext,
                                   double azimuth, double elevation);

struct DealiasResult {
  double v_r = 0.0;
  long n = 0;
};

/// Unfolds a Doppler measurement using a predicted velocity:
/// n = nint((v_e - v_d) / (2 V_N)), ties to even, v_r = v_d + 2 n V_N.
/// Throws AliasDomainError when |v_d| > V_N.
DealiasResult dealias(double v_d, double v_e, double nyquist);

enum class GateDecision { Accept, LowSNR, Innovation };

GateDecision gate_point(const RadarPoint& p, double v_e, double v_r, const Thresholds& th);

const char* to_string(GateDecision d);

/// One accepted radar point bound to the window state at its capture time.
struct DopplerFactor {
  double state_timestamp = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
  Vec3 bearing = Vec3::UnitX();
  double v_r = 0.0;        // de-aliased Doppler
  double raw_doppler = 0.0;
  long n = 0;              // fold count
  double sigma = 0.25;
  int radar_id = 0;
};

struct DopplerResidual {
  double residual = 0.0;      // (v_r - v_e) / sigma
  Vec3 d_state = Vec3::Zero();  // d residual / d (vx, vy, r)
  bool robust = true;         // Cauchy loss applies
};

DopplerResidual doppler_residual(const DopplerFactor& f, const VehicleState& x_at_capture,
                                 const RadarExtrinsics& ext);

struct ScanFactors {
  std::vector<DopplerFactor> factors;
  std::size_t node_index = 0;
  bool inserted_state = false;
  int rejected_snr = 0;
  int rejected_innovation = 0;
  int rejected_alias = 0;
};

/// Binds a scan to the window state at its capture time, inserting that
/// state if needed, then de-aliases and gates each point against the
/// expected Doppler at that state. Throws StaleScanError when the capture
/// time precedes the window.
ScanFactors scan_to_factors(const RadarScan& scan, mhe::SlidingWindow& window,
                            const VehicleConfig& cfg);

/// Robust planar ego speed from raw Doppler, assuming no yaw rate and no
/// aliasing. Feeds the standstill detector. NaN for fewer than two points.
double radar_ego_speed(const RadarScan& scan, const RadarExtrinsics& ext);

}  // namespace gripest
