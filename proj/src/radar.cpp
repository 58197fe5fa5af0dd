#include "gripest/radar.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gripest/errors.hpp"
#include "gripest/mhe/window.hpp"

namespace gripest {

Vec3 bearing_vector(double azimuth, double elevation) {
  const double ce = std::cos(elevation);
  return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

DopplerPrediction expected_doppler(const VehicleState& x, const RadarExtrinsics& ext,
                                   double azimuth, double elevation) {
  // v_e = -b . R^T v = -(R b) . v, and v is linear in (vx, vy, r).
  const Vec3 c = ext.rotation * bearing_vector(azimuth, elevation);
  const Vec3& t = ext.translation;
  DopplerPrediction p;
  p.d_state = Vec3(-c.x(), -c.y(), c.x() * t.y() - c.y() * t.x());
  p.value = p.d_state.x() * x.vx + p.d_state.y() * x.vy + p.d_state.z() * x.r;
  return p;
}

DealiasResult dealias(double v_d, double v_e, double nyquist) {
  if (!(nyquist > 0.0)) throw AliasDomainError("nyquist velocity must be positive");
  if (!std::isfinite(v_d) || std::abs(v_d) > nyquist) {
    throw AliasDomainError("raw doppler " + std::to_string(v_d) + " outside +/-" +
                           std::to_string(nyquist));
  }
  // nearbyint follows the default rounding mode: ties to even.
  const double n = std::nearbyint((v_e - v_d) / (2.0 * nyquist));
  return {v_d + 2.0 * n * nyquist, static_cast<long>(n)};
}

GateDecision gate_point(const RadarPoint& p, double v_e, double v_r, const Thresholds& th) {
  if (p.snr < th.snr_min) return GateDecision::LowSNR;
  if (std::abs(v_r - v_e) > th.dV_r_max) return GateDecision::Innovation;
  return GateDecision::Accept;
}

const char* to_string(GateDecision d) {
  switch (d) {
    case GateDecision::Accept:
      return "accept";
    case GateDecision::LowSNR:
      return "low_snr";
    case GateDecision::Innovation:
      return "innovation";
  }
  return "unknown";
}

DopplerResidual doppler_residual(const DopplerFactor& f, const VehicleState& x_at_capture,
                                 const RadarExtrinsics& ext) {
  const DopplerPrediction pred = expected_doppler(x_at_capture, ext, f.azimuth, f.elevation);
  DopplerResidual r;
  r.residual = (f.v_r - pred.value) / f.sigma;
  r.d_state = -pred.d_state / f.sigma;
  return r;
}

ScanFactors scan_to_factors(const RadarScan& scan, mhe::SlidingWindow& window,
                            const VehicleConfig& cfg) {
  if (scan.radar_id < 0 || static_cast<std::size_t>(scan.radar_id) >= cfg.radars.size()) {
    throw RangeError("unknown radar_id " + std::to_string(scan.radar_id));
  }
  const RadarExtrinsics& ext = cfg.radars[static_cast<std::size_t>(scan.radar_id)];
  // Throws StaleScanError before anything is modified.
  const VehicleState guess = window.predict_state(scan.t_capture);

  ScanFactors out;
  for (const RadarPoint& p : scan.points) {
    const double v_e = expected_doppler(guess, ext, p.azimuth, p.elevation).value;
    DealiasResult d;
    try {
      d = dealias(p.doppler, v_e, ext.nyquist);
    } catch (const AliasDomainError&) {
      ++out.rejected_alias;
      continue;
    }
    switch (gate_point(p, v_e, d.v_r, cfg.thresholds)) {
      case GateDecision::LowSNR:
        ++out.rejected_snr;
        continue;
      case GateDecision::Innovation:
        ++out.rejected_innovation;
        continue;
      case GateDecision::Accept:
        break;
    }
    DopplerFactor f;
    f.state_timestamp = scan.t_capture;
    f.azimuth = p.azimuth;
    f.elevation = p.elevation;
    f.bearing = bearing_vector(p.azimuth, p.elevation);
    f.v_r = d.v_r;
    f.raw_doppler = p.doppler;
    f.n = d.n;
    f.sigma = cfg.covariances.sigma_doppler;
    f.radar_id = scan.radar_id;
    out.factors.push_back(f);
  }
  if (out.factors.empty()) return out;

  const std::size_t before = window.size();
  out.node_index = window.insert_state(scan.t_capture);
  out.inserted_state = window.size() != before;
  auto& bound = window.node(out.node_index).doppler;
  bound.insert(bound.end(), out.factors.begin(), out.factors.end());
  return out;
}

double radar_ego_speed(const RadarScan& scan, const RadarExtrinsics& ext) {
  // Solve v_d = -c . (vx, vy) for planar velocity. A least-median fit over
  // point pairs gives the start, then Cauchy reweighting refines it, so
  // moving targets do not pull the answer.
  const std::size_t n = scan.points.size();
  if (n < 2) return std::nan("");
  std::vector<Vec2> rows(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const RadarPoint& p = scan.points[i];
    const Vec3 c = ext.rotation * bearing_vector(p.azimuth, p.elevation);
    rows[i] = Vec2(-c.x(), -c.y());
    d[i] = p.doppler;
  }
  auto median_abs_residual = [&](const Vec2& v) {
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::abs(d[i] - rows[i].dot(v));
    std::nth_element(e.begin(), e.begin() + static_cast<long>(n / 2), e.end());
    return e[n / 2];
  };

  Vec2 v = Vec2::Zero();
  bool found = false;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Eigen::Matrix2d A;
      A << rows[i].transpose(), rows[j].transpose();
      if (std::abs(A.determinant()) < 1e-3) continue;
      const Vec2 cand = A.inverse() * Vec2(d[i], d[j]);
      const double m = median_abs_residual(cand);
      if (m < best) {
        best = m;
        v = cand;
        found = true;
      }
    }
  }
  if (!found) {
    // Degenerate geometry (all bearings collinear): use the projection only.
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += rows[i].norm() * std::abs(d[i]);
      den += rows[i].squaredNorm();
    }
    return den > 0.0 ? num / den : std::nan("");
  }

  constexpr double kScale = 0.5;
  Eigen::Matrix2d H;
  for (int iter = 0; iter < 5; ++iter) {
    H.setZero();
    Vec2 g = Vec2::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double e = (d[i] - rows[i].dot(v)) / kScale;
      const double w = 1.0 / (1.0 + e * e);
      H += w * rows[i] * rows[i].transpose();
      g += w * rows[i] * d[i];
    }
    if (std::abs(H.determinant()) < 1e-12) break;
    v = H.ldlt().solve(g);
  }
  // Across a narrow field of view one direction is barely constrained and
  // its component is mostly noise; keep only well observed directions.
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(H);
  const Vec2 lambda = eig.eigenvalues();
  double speed2 = 0.0;
  for (int k = 0; k < 2; ++k) {
    if (lambda[k] >= 0.1 * lambda.maxCoeff()) speed2 += std::pow(eig.eigenvectors().col(k).dot(v), 2);
  }
  return std::sqrt(speed2);
}

}  // namespace gripest
