#include "commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "gripest/errors.hpp"
#include "gripest/event_io.hpp"
#include "gripest/output.hpp"
#include "gripest/sim/scenario.hpp"

namespace gripest::cli {

namespace {

using nlohmann::json;

VehicleConfig resolve_config(const std::optional<std::string>& path) {
  return path ? load_config(*path) : validate_config(default_config());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path + "'");
  return f;
}

json params_json(const TireParamSet& p) {
  auto axle = [](const PacejkaAxleParams& a) {
    return json::array({a.B, a.C, a.D, a.E, a.Sh, a.Sv});
  };
  return {{"front", axle(p.front)}, {"rear", axle(p.rear)}};
}

TireParamSet params_from_json(const json& j) {
  auto axle = [](const json& a) {
    if (!a.is_array() || a.size() != 6) throw SchemaError("tire parameters need 6 numbers");
    Vec6 v;
    for (int i = 0; i < 6; ++i) v[i] = a.at(static_cast<std::size_t>(i)).get<double>();
    return PacejkaAxleParams::from_vec(v);
  };
  return {axle(j.at("front")), axle(j.at("rear"))};
}

}  // namespace

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SimFiles cmd_sim(const SimOptions& opt) {
  const VehicleConfig cfg = resolve_config(opt.config_path);
  sim::Preset preset = sim::make_preset(opt.scenario, cfg, opt.seed);
  if (opt.outlier_fraction) {
    if (*opt.outlier_fraction < 0.0 || *opt.outlier_fraction > 1.0) {
      throw UsageError("--outliers must be within [0, 1]");
    }
    preset.noise.radar.outlier_fraction = *opt.outlier_fraction;
  }
  const sim::ScenarioResult result =
      sim::run_scenario(preset.script, preset.truth_params, preset.noise, cfg);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) throw IoError("cannot create '" + opt.out_dir + "': " + ec.message());
  const fs::path dir(opt.out_dir);
  SimFiles files;
  files.log = (dir / (opt.scenario + ".jsonl")).string();
  files.truth = (dir / (opt.scenario + "_truth.csv")).string();
  files.manifest = (dir / (opt.scenario + "_manifest.json")).string();
  files.config = (dir / (opt.scenario + "_config.json")).string();

  {
    auto f = open_out(files.log);
    sim::write_log(f, result.log);
    if (!f) throw IoError("failed writing '" + files.log + "'");
  }
  {
    auto f = open_out(files.truth);
    write_truth_csv(f, result.truth);
    if (!f) throw IoError("failed writing '" + files.truth + "'");
  }
  const std::string est_cfg = config_to_json_text(preset.estimator_config);
  {
    auto f = open_out(files.config);
    f << est_cfg << '\n';
  }
  json manifest;
  manifest["scenario"] = opt.scenario;
  manifest["seed"] = opt.seed;
  manifest["config_hash"] = fnv1a_hex(config_to_json_text(cfg));
  manifest["estimator_config_hash"] = fnv1a_hex(est_cfg);
  manifest["duration"] = preset.script.duration();
  manifest["cornering_start"] = preset.cornering_start;
  manifest["truth_params"] = params_json(preset.truth_params);
  manifest["tire_init"] = params_json(preset.estimator_config.tire_init);
  manifest["outlier_fraction"] = preset.noise.radar.outlier_fraction;
  manifest["events"] = result.log.size();
  manifest["files"] = {{"log", fs::path(files.log).filename().string()},
                       {"truth", fs::path(files.truth).filename().string()},
                       {"config", fs::path(files.config).filename().string()}};
  auto f = open_out(files.manifest);
  f << manifest.dump(2) << '\n';
  return files;
}

mhe::Estimator run_estimator(const std::vector<SensorEvent>& log, const VehicleConfig& cfg) {
  mhe::Estimator est(cfg);
  for (const SensorEvent& e : log) est.process(e);
  est.finish();
  return est;
}

namespace {

std::vector<SensorEvent> load_log(const std::string& path) {
  auto f = open_in(path);
  return read_log(f);
}

}  // namespace

EstimateSummary cmd_estimate(const std::string& log_path,
                             const std::optional<std::string>& config_path,
                             const std::string& out_csv) {
  const VehicleConfig cfg = resolve_config(config_path);
  std::vector<SensorEvent> log = load_log(log_path);
  std::stable_sort(log.begin(), log.end(), [](const SensorEvent& a, const SensorEvent& b) {
    return receive_time(a) < receive_time(b);
  });
  const mhe::Estimator est = run_estimator(log, cfg);

  auto f = open_out(out_csv);
  write_estimate_csv(f, est.rows());
  if (!f) throw IoError("failed writing '" + out_csv + "'");

  EstimateSummary s;
  s.rows = est.rows().size();
  s.stats = est.stats();
  s.warnings = est.warnings();
  std::vector<double> times;
  for (const auto& r : est.reports()) {
    times.push_back(r.wall_time);
    s.max_iterations = std::max(s.max_iterations, r.iterations);
    s.final_costs.push_back(r.final_cost);
  }
  s.solve_time = timing_stats(times);
  return s;
}

MetricsReport cmd_metrics(const std::string& estimate_csv, const std::string& truth_csv,
                          const std::optional<std::string>& config_path,
                          const std::optional<std::string>& params_manifest) {
  const VehicleConfig cfg = resolve_config(config_path);
  auto fe = open_in(estimate_csv);
  const auto est = read_estimate_csv(fe);
  auto ft = open_in(truth_csv);
  const auto truth = read_truth_csv(ft);
  std::optional<TireParamSet> params;
  if (params_manifest) {
    auto fm = open_in(*params_manifest);
    json m;
    try {
      m = json::parse(fm);
      params = params_from_json(m.at("truth_params"));
    } catch (const json::exception& e) {
      throw SchemaError("manifest '" + *params_manifest + "': " + e.what());
    }
  }
  return compute_metrics(est, truth, cfg, params);
}

BenchReport cmd_bench(const std::string& log_path, const std::optional<std::string>& config_path,
                      int repetitions) {
  if (repetitions <= 0) throw UsageError("--reps must be at least 1");
  const VehicleConfig cfg = resolve_config(config_path);
  std::vector<SensorEvent> log = load_log(log_path);
  std::stable_sort(log.begin(), log.end(), [](const SensorEvent& a, const SensorEvent& b) {
    return receive_time(a) < receive_time(b);
  });

  BenchReport b;
  b.repetitions = repetitions;
  std::vector<double> solve_times, tick_times, first_costs;
  using Clock = std::chrono::steady_clock;
  for (int rep = 0; rep < repetitions; ++rep) {
    mhe::Estimator est(cfg);
    for (const SensorEvent& e : log) {
      const auto t0 = Clock::now();
      est.process(e);
      if (std::holds_alternative<ImuSample>(e)) {
        tick_times.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      }
    }
    est.finish();
    std::vector<double> costs;
    for (const auto& r : est.reports()) {
      solve_times.push_back(r.wall_time);
      b.max_iterations = std::max(b.max_iterations, r.iterations);
      costs.push_back(r.final_cost);
    }
    if (rep == 0) {
      first_costs = costs;
    } else if (costs != first_costs) {
      b.costs_identical = false;
    }
  }
  b.per_solve = timing_stats(solve_times);
  b.per_tick = timing_stats(tick_times);
  return b;
}

std::string summary_text(const EstimateSummary& s) {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "rows %zu, solves %d (watchdog %d), scans %d, stale events %d (scans %d)\n"
                "points accepted %d, rejected: snr %d, innovation %d, alias %d\n",
                s.rows, s.stats.solves, s.stats.watchdog_solves, s.stats.scans,
                s.stats.stale_events, s.stats.stale_scans, s.stats.accepted_points,
                s.stats.rejected_snr, s.stats.rejected_innovation, s.stats.rejected_alias);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "solve time: mean %.3f ms, p50 %.3f ms, p99 %.3f ms, max %.3f ms; max iterations %d\n",
                s.solve_time.mean * 1e3, s.solve_time.p50 * 1e3, s.solve_time.p99 * 1e3,
                s.solve_time.max * 1e3, s.max_iterations);
  out += buf;
  for (const auto& w : s.warnings) out += "warning: " + w + "\n";
  return out;
}

std::string bench_text(const BenchReport& b) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "repetitions %d\n"
                "per solve: mean %.3f ms, p50 %.3f ms, p99 %.3f ms, max %.3f ms (%d solves)\n"
                "per tick:  mean %.3f ms, p50 %.3f ms, p99 %.3f ms, max %.3f ms\n"
                "max iterations %d, costs identical across repetitions: %s\n",
                b.repetitions, b.per_solve.mean * 1e3, b.per_solve.p50 * 1e3,
                b.per_solve.p99 * 1e3, b.per_solve.max * 1e3, b.per_solve.count,
                b.per_tick.mean * 1e3, b.per_tick.p50 * 1e3, b.per_tick.p99 * 1e3,
                b.per_tick.max * 1e3, b.max_iterations, b.costs_identical ? "yes" : "no");
  return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint velocity, slip and tire-parameter estimation from IMU and radar logs"};
  app.require_subcommand(1);

  std::optional<std::string> config;
  SimOptions sim_opt;
  auto* sim = app.add_subcommand("sim", "Generate a synthetic sensor log and its truth");
  sim->add_option("scenario", sim_opt.scenario, "Scenario preset")->required();
  sim->add_option("--config", sim_opt.config_path, "Vehicle configuration (JSON)");
  sim->add_option("--seed", sim_opt.seed, "Random seed");
  sim->add_option("--out", sim_opt.out_dir, "Output directory");
  sim->add_option("--outliers", sim_opt.outlier_fraction, "Fraction of moving-object points");

  std::string log_path, out_csv = "estimate.csv";
  auto* estimate = app.add_subcommand("estimate", "Replay a sensor log through the estimator");
  estimate->add_option("log", log_path, "Sensor log (JSONL)")->required();
  estimate->add_option("--config", config, "Vehicle configuration (JSON)");
  estimate->add_option("--out", out_csv, "Estimate CSV");

  std::string est_csv, truth_csv;
  std::optional<std::string> params, metrics_out;
  auto* metrics = app.add_subcommand("metrics", "Compare an estimate with simulator truth");
  metrics->add_option("estimate", est_csv, "Estimate CSV")->required();
  metrics->add_option("truth", truth_csv, "Truth CSV")->required();
  metrics->add_option("--config", config, "Vehicle configuration (JSON)");
  metrics->add_option("--params", params, "Simulator manifest with truth tire parameters");
  metrics->add_option("--out", metrics_out, "Write the JSON report here");

  int reps = 10;
  auto* bench = app.add_subcommand("bench", "Time the estimator on a sensor log");
  bench->add_option("log", log_path, "Sensor log (JSONL)")->required();
  bench->add_option("--config", config, "Vehicle configuration (JSON)");
  bench->add_option("--reps", reps, "Repetitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (*sim) {
      const SimFiles f = cmd_sim(sim_opt);
      out << "log      " << f.log << "\ntruth    " << f.truth << "\nmanifest " << f.manifest
          << "\nconfig   " << f.config << "\n";
    } else if (*estimate) {
      const EstimateSummary s = cmd_estimate(log_path, config, out_csv);
      out << summary_text(s);
    } else if (*metrics) {
      const MetricsReport m = cmd_metrics(est_csv, truth_csv, config, params);
      out << metrics_table(m);
      const std::string j = metrics_to_json(m);
      if (metrics_out) {
        auto f = open_out(*metrics_out);
        f << j << '\n';
      } else {
        out << j << '\n';
      }
    } else if (*bench) {
      out << bench_text(cmd_bench(log_path, config, reps));
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const RangeError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "estimation error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace gripest::cli
