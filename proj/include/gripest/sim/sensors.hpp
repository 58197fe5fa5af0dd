#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gripest/config.hpp"
#include "gripest/sim/truth.hpp"
#include "gripest/types.hpp"

namespace gripest::sim {

struct ImuNoise {
  double accel_std = 0.05;   // m/s^2
  double gyro_std = 0.001;   // rad/s
  Vec3 bias = Vec3::Zero();  // injected (bx, by, br)
  double rate = 200.0;       // Hz
};

struct RadarNoise {
  double mu_N = 25.0;  // points per scan
  double sigma_N = 6.0;
  double mu_theta = 0.0;  // azimuth Cauchy location / scale (rad)
  double gamma_theta = 0.35;
  double mu_phi = 0.0;  // elevation Cauchy location / scale (rad)
  double gamma_phi = 0.05;
  double angle_std = 0.003;  // Gaussian bearing noise (rad)
  double mu_vd = 0.0;        // Doppler Cauchy noise location / scale (m/s)
  double gamma_vd = 0.05;
  double mu_td = 0.09;  // latency mean / std (s)
  double sigma_td = 0.005;
  double snr_min = 5.0;  // uniform SNR band (dB)
  double snr_max = 35.0;
  double range_min = 1.0;
  double range_max = 80.0;
  double outlier_fraction = 0.0;  // points on moving objects
  double outlier_offset = 10.0;   // their Doppler offset (m/s)
  double period = 0.06;           // per-radar trigger period (s)
  double stagger = 0.02;          // trigger offset between consecutive radars (s)
};

struct NoiseConfig {
  ImuNoise imu;
  RadarNoise radar;
  double steering_rate = 100.0;  // Hz
  double reference_rate = 100.0;  // Hz
  std::uint64_t seed = 1;
};

/// Folds a velocity into (-V_N, V_N]: v - 2 V_N n with n = ceil(v / (2 V_N) - 1/2).
double wrap(double v, double nyquist);

using Rng = std::mt19937_64;

/// IMU samples at noise.imu.rate drawn from the truth trajectory (which
/// must be sampled on a grid that divides the IMU period).
std::vector<ImuSample> gen_imu(const std::vector<TruthState>& truth, const ImuNoise& noise,
                               double g, Rng& rng);

/// One scan of a static world seen from `ext` at the truth state.
RadarScan gen_radar_scan(const TruthState& truth, int radar_id, const RadarExtrinsics& ext,
                         const FieldOfView& fov, const RadarNoise& noise, Rng& rng);

}  // namespace gripest::sim
