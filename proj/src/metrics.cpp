#include "gripest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <json.hpp>
#include <ostream>

#include "gripest/errors.hpp"
#include "gripest/tire.hpp"

namespace gripest {

namespace {

constexpr double kAlignTol = 0.005 + 1e-9;

class Accumulator {
 public:
  void add(double err) {
    max_ = std::max(max_, std::abs(err));
    sum_sq_ += err * err;
    ++n_;
  }
  ChannelError result() const {
    ChannelError c;
    c.count = n_;
    if (n_ > 0) {
      c.max_abs = max_;
      c.rmse = std::sqrt(sum_sq_ / n_);
    }
    return c;
  }

 private:
  double max_ = 0.0;
  double sum_sq_ = 0.0;
  int n_ = 0;
};

nlohmann::json channel_json(const ChannelError& c) {
  return {{"max_abs_err", c.max_abs}, {"rmse", c.rmse}, {"count", c.count}};
}

}  // namespace

TimingStats timing_stats(std::vector<double> s) {
  TimingStats t;
  t.count = static_cast<int>(s.size());
  if (s.empty()) return t;
  std::sort(s.begin(), s.end());
  double sum = 0.0;
  for (double v : s) sum += v;
  t.mean = sum / static_cast<double>(s.size());
  auto pct = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(s.size()))) - 1;
    return s[std::min(idx, s.size() - 1)];
  };
  t.p50 = pct(0.5);
  t.p99 = pct(0.99);
  t.max = s.back();
  return t;
}

std::vector<TruthRecord> read_truth_csv(std::istream& in) {
  const CsvTable table = read_csv_table(in);
  std::vector<std::size_t> idx;
  for (const char* name :
       {"t", "vx", "vy", "r", "ax", "ay", "delta", "Fyf", "Fyr", "alpha_f", "alpha_r"}) {
    const int c = table.column(name);
    if (c < 0) throw SchemaError(std::string("truth CSV lacks column '") + name + "'");
    idx.push_back(static_cast<std::size_t>(c));
  }
  std::vector<TruthRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    out.push_back({row[idx[0]], row[idx[1]], row[idx[2]], row[idx[3]], row[idx[4]], row[idx[5]],
                   row[idx[6]], row[idx[7]], row[idx[8]], row[idx[9]], row[idx[10]]});
  }
  return out;
}

void write_truth_csv(std::ostream& out, const std::vector<TruthRecord>& rows) {
  out << kTruthCsvHeader << '\n';
  char buf[512];
  for (const TruthRecord& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.t,
                  r.vx, r.vy, r.r, r.ax, r.ay, r.delta, r.Fyf, r.Fyr, r.alpha_f, r.alpha_r);
    out << buf;
  }
}

MetricsReport compute_metrics(const std::vector<EstimateRecord>& estimate,
                              const std::vector<TruthRecord>& truth, const VehicleConfig& cfg,
                              const std::optional<TireParamSet>& truth_params) {
  MetricsReport m;
  Accumulator vx, vy, af, ar, ff, fr;
  std::vector<std::pair<double, bool>> bcd_ok;

  double bcd_f = 0.0, bcd_r = 0.0;
  if (truth_params) {
    bcd_f = cornering_stiffness(truth_params->front);
    bcd_r = cornering_stiffness(truth_params->rear);
  }

  std::size_t j = 0;
  for (const EstimateRecord& e : estimate) {
    while (j + 1 < truth.size() && std::abs(truth[j + 1].t - e.t) <= std::abs(truth[j].t - e.t)) {
      ++j;
    }
    if (truth.empty() || std::abs(truth[j].t - e.t) > kAlignTol) continue;
    const TruthRecord& tr = truth[j];
    ++m.aligned_rows;
    vx.add(e.vx - tr.vx);
    vy.add(e.vy - tr.vy);
    if (truth_params) {
      const bool ok = std::abs(e.BCD_f - bcd_f) <= 0.05 * std::abs(bcd_f) &&
                      std::abs(e.BCD_r - bcd_r) <= 0.05 * std::abs(bcd_r);
      bcd_ok.emplace_back(e.t, ok);
    }
    if (std::hypot(tr.vx, tr.vy) <= cfg.thresholds.V_Fy_min) continue;
    if (!e.alpha_f || !e.alpha_r || !e.Fyf || !e.Fyr) continue;
    ++m.gated_rows;
    af.add(*e.alpha_f - tr.alpha_f);
    ar.add(*e.alpha_r - tr.alpha_r);
    ff.add(*e.Fyf - tr.Fyf);
    fr.add(*e.Fyr - tr.Fyr);
  }
  if (m.aligned_rows == 0) {
    throw AlignmentError("estimate and truth have no samples within 5 ms of each other");
  }
  m.vx = vx.result();
  m.vy = vy.result();
  m.alpha_f = af.result();
  m.alpha_r = ar.result();
  m.Fyf = ff.result();
  m.Fyr = fr.result();

  if (!bcd_ok.empty() && bcd_ok.back().second) {
    std::size_t k = bcd_ok.size();
    while (k > 0 && bcd_ok[k - 1].second) --k;
    m.convergence_time = bcd_ok[k].first;
  }
  return m;
}

double normalized_curve_rmse(const PacejkaAxleParams& est, const PacejkaAxleParams& truth,
                             double slip_max, int samples) {
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = -slip_max + 2.0 * slip_max * i / (samples - 1);
    const double d = magic_formula(x, est) - magic_formula(x, truth);
    sum += d * d;
  }
  return std::sqrt(sum / samples) / truth.D;
}

std::string metrics_to_json(const MetricsReport& m) {
  nlohmann::json j;
  j["vx"] = channel_json(m.vx);
  j["vy"] = channel_json(m.vy);
  j["alpha_f"] = channel_json(m.alpha_f);
  j["alpha_r"] = channel_json(m.alpha_r);
  j["Fyf"] = channel_json(m.Fyf);
  j["Fyr"] = channel_json(m.Fyr);
  j["aligned_rows"] = m.aligned_rows;
  j["gated_rows"] = m.gated_rows;
  j["convergence_time"] = m.convergence_time ? nlohmann::json(*m.convergence_time) : nullptr;
  if (m.solve_time) {
    j["solve_time"] = {{"mean", m.solve_time->mean},
                       {"p50", m.solve_time->p50},
                       {"p99", m.solve_time->p99},
                       {"max", m.solve_time->max},
                       {"count", m.solve_time->count}};
  }
  return j.dump(2);
}

std::string metrics_table(const MetricsReport& m) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %14s %14s %8s\n", "channel", "max_abs_err", "rmse", "n");
  out += buf;
  auto row = [&](const char* name, const ChannelError& c, double scale, const char* unit) {
    std::snprintf(buf, sizeof buf, "%-10s %14.6g %14.6g %8d  %s\n", name, c.max_abs * scale,
                  c.rmse * scale, c.count, unit);
    out += buf;
  };
  constexpr double kDeg = 180.0 / 3.14159265358979323846;
  row("vx", m.vx, 1.0, "m/s");
  row("vy", m.vy, 1.0, "m/s");
  row("alpha_f", m.alpha_f, kDeg, "deg");
  row("alpha_r", m.alpha_r, kDeg, "deg");
  row("Fyf", m.Fyf, 1.0, "N");
  row("Fyr", m.Fyr, 1.0, "N");
  if (m.convergence_time) {
    std::snprintf(buf, sizeof buf, "BCD within 5%% from t = %.3f s\n", *m.convergence_time);
    out += buf;
  }
  if (m.solve_time) {
    std::snprintf(buf, sizeof buf, "solve time: mean %.3f ms, p99 %.3f ms, max %.3f ms (%d)\n",
                  m.solve_time->mean * 1e3, m.solve_time->p99 * 1e3, m.solve_time->max * 1e3,
                  m.solve_time->count);
    out += buf;
  }
  return out;
}

}  // namespace gripest
