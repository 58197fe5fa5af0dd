#include "gripest/sim/sensors.hpp"

#include <algorithm>
#include <cmath>

#include "gripest/event_io.hpp"
#include "gripest/radar.hpp"

namespace gripest::sim {

double wrap(double v, double nyquist) {
  const double n = std::ceil(v / (2.0 * nyquist) - 0.5);
  return v - 2.0 * nyquist * n;
}

std::vector<ImuSample> gen_imu(const std::vector<TruthState>& truth, const ImuNoise& noise,
                               double g, Rng& rng) {
  std::vector<ImuSample> out;
  if (truth.size() < 2) return out;
  const double dt_truth = truth[1].t - truth[0].t;
  const auto stride = std::max<long>(1, std::lround(1.0 / (noise.rate * dt_truth)));
  std::normal_distribution<double> accel(0.0, noise.accel_std);
  std::normal_distribution<double> gyro(0.0, noise.gyro_std);
  const bool noisy_a = noise.accel_std > 0.0;
  const bool noisy_g = noise.gyro_std > 0.0;
  for (std::size_t k = 0; k < truth.size(); k += static_cast<std::size_t>(stride)) {
    const TruthState& s = truth[k];
    ImuSample m;
    m.t = round_to_microseconds(s.t);
    m.ax = s.ax + noise.bias.x() + (noisy_a ? accel(rng) : 0.0);
    m.ay = s.ay + noise.bias.y() + (noisy_a ? accel(rng) : 0.0);
    m.r = s.r + noise.bias.z() + (noisy_g ? gyro(rng) : 0.0);
    m.az = g + (noisy_a ? accel(rng) : 0.0);
    m.gx = noisy_g ? gyro(rng) : 0.0;
    m.gy = noisy_g ? gyro(rng) : 0.0;
    out.push_back(m);
  }
  return out;
}

RadarScan gen_radar_scan(const TruthState& truth, int radar_id, const RadarExtrinsics& ext,
                         const FieldOfView& fov, const RadarNoise& noise, Rng& rng) {
  std::normal_distribution<double> count(noise.mu_N, noise.sigma_N);
  std::cauchy_distribution<double> azimuth(noise.mu_theta, noise.gamma_theta);
  std::cauchy_distribution<double> elevation(noise.mu_phi, noise.gamma_phi);
  std::normal_distribution<double> angle_noise(0.0, noise.angle_std);
  std::cauchy_distribution<double> doppler_noise(noise.mu_vd, noise.gamma_vd);
  std::uniform_real_distribution<double> snr(noise.snr_min, noise.snr_max);
  std::uniform_real_distribution<double> range(noise.range_min, noise.range_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> latency(noise.mu_td, noise.sigma_td);

  RadarScan scan;
  scan.radar_id = radar_id;
  scan.t_capture = round_to_microseconds(truth.t);
  scan.t_receive = round_to_microseconds(truth.t + std::max(0.0, latency(rng)));

  const long n = std::max(0L, std::lround(count(rng)));
  const VehicleState x = truth.vehicle_state();
  for (long i = 0; i < n; ++i) {
    const double theta = std::clamp(azimuth(rng), -fov.azimuth_max, fov.azimuth_max);
    const double phi = std::clamp(elevation(rng), -fov.elevation_max, fov.elevation_max);
    double v = expected_doppler(x, ext, theta, phi).value + doppler_noise(rng);
    if (noise.outlier_fraction > 0.0 && unit(rng) < noise.outlier_fraction) {
      v += noise.outlier_offset;
    }
    RadarPoint p;
    p.range = range(rng);
    p.azimuth = std::clamp(theta + angle_noise(rng), -fov.azimuth_max, fov.azimuth_max);
    p.elevation = std::clamp(phi + angle_noise(rng), -fov.elevation_max, fov.elevation_max);
    p.doppler = wrap(v, ext.nyquist);
    p.snr = snr(rng);
    scan.points.push_back(p);
  }
  return scan;
}

}  // namespace gripest::sim
