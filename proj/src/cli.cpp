#include "fusetrack/cli.hpp"

#include "fusetrack/bench.hpp"
#include "fusetrack/errors.hpp"
#include "fusetrack/log_io.hpp"
#include "fusetrack/simulator.hpp"
#include "fusetrack/tracker.hpp"
#include "fusetrack/truth_eval.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fusetrack {

namespace {

namespace fs = std::filesystem;

struct SimulateArgs {
  std::string scenario = "highway";
  double duration = 60.0;
  std::uint64_t seed = 0;
  std::string out;
  int clutter = 0;
  std::vector<std::string> radar_dropout;
  int lidar_velocity_hold = 0;
  bool noise_free = false;
};

struct FuseArgs {
  std::string sensors;
  std::string ego;
  std::string out;
  double alpha = kDefaultGateAlpha;
  int coast = 0;
  std::string cost_covariance = "track";
  std::string rotation = "inverse";
  bool keep_on_empty = false;
};

struct EvalArgs {
  std::string tracks;
  std::string truth;
  std::string report = "csv";
  std::string out;
  std::string sensors;
  std::string ego;
};

struct GtArgs {
  std::string rtk;
  std::string out;
  std::string ego;
  bool no_transport = false;
};

struct BenchArgs {
  int obstacles = 50;
  int cycles = 10000;
  std::uint64_t seed = 1;
};

std::pair<double, double> parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidInputError("dropout window must be START:END, got " + text);
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw InvalidInputError("dropout window must be START:END, got " + text);
  }
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  ScenarioConfig cfg = a.scenario == "bend" ? ScenarioConfig::bend(a.duration, a.seed)
                                            : ScenarioConfig::highway(a.duration, a.seed);
  cfg.static_clutter = a.clutter;
  for (SensorSimConfig& s : cfg.sensors) {
    if (s.sensor_id == SensorId::Radar) {
      for (const std::string& w : a.radar_dropout) s.dropout_windows.push_back(parse_window(w));
    } else {
      s.velocity_hold_frames = a.lidar_velocity_hold;
    }
    if (a.noise_free) s.obs_cov = Mat4::Zero();
  }
  if (a.noise_free) {
    cfg.rtk_sigma_pos = 0.0;
    cfg.rtk_sigma_vel = 0.0;
  }
  const LogBundle bundle = simulate(cfg);
  write_bundle(a.out, bundle);
  out << "wrote " << bundle.frames.size() << " sensor frames, " << bundle.ego.size()
      << " ego records, " << bundle.rtk.size() << " rtk fixes to " << a.out << '\n';
  return kExitOk;
}

int run_fuse(const FuseArgs& a, std::ostream& out) {
  TrackerConfig cfg;
  cfg.alpha = a.alpha;
  cfg.coast_cycles = a.coast;
  cfg.cost_covariance =
      a.cost_covariance == "track_plus_obs" ? CostCovariance::TrackPlusObs : CostCovariance::Track;
  cfg.rotation = a.rotation == "printed" ? RotationConvention::AsPrinted : RotationConvention::FrameInverse;
  cfg.empty_frame_deletes = !a.keep_on_empty;

  const auto frames = read_records<SensorFrame>(a.sensors);
  const auto ego = a.ego.empty() ? std::vector<EgoMotion>{} : read_records<EgoMotion>(a.ego);
  const ProcessResult result = process_log(frames, ego, cfg);
  write_records(a.out, result.lists);
  out << "fused " << result.lists.size() << " lists (" << result.dropped_stale_frames
      << " stale frames dropped) to " << a.out << '\n';
  return kExitOk;
}

int run_eval(const EvalArgs& a, std::ostream& out) {
  const auto lists = read_records<FusedList>(a.tracks);
  const auto truth = read_records<RelativeState>(a.truth);
  const auto ego = a.ego.empty() ? std::vector<EgoMotion>{} : read_records<EgoMotion>(a.ego);
  const EvalConfig cfg;

  MatchedSeries radar;
  MatchedSeries lidar;
  if (!a.sensors.empty()) {
    std::vector<SensorFrame> radar_frames;
    std::vector<SensorFrame> lidar_frames;
    for (SensorFrame& f : read_records<SensorFrame>(a.sensors)) {
      (f.sensor_id == SensorId::Radar ? radar_frames : lidar_frames).push_back(std::move(f));
    }
    radar = match_series(radar_frames, truth, ego, cfg);
    lidar = match_series(lidar_frames, truth, ego, cfg);
    if (radar.samples.empty() || lidar.samples.empty()) {
      throw UndefinedMseError("undefined MSE: a sensor stream has no sample matched to the ground truth");
    }
  }
  const MatchedSeries fusion = match_series(lists, truth, ego, cfg);
  if (fusion.samples.empty()) {
    throw UndefinedMseError("undefined MSE: no fused sample overlaps the ground truth");
  }
  const MseReport report = evaluate(radar, lidar, fusion, truth, cfg);
  const std::string text = a.report == "json" ? report_json(report) : report_csv(report);
  if (a.out.empty()) {
    out << text;
  } else {
    std::ofstream file(a.out, std::ios::binary | std::ios::trunc);
    if (!file) throw ParseError("cannot write " + a.out);
    file << text;
  }
  return kExitOk;
}

int run_gt(const GtArgs& a, std::ostream& out) {
  const auto fixes = read_records<RtkFix>(a.rtk);
  const auto ego = a.ego.empty() ? std::vector<EgoMotion>{} : read_records<EgoMotion>(a.ego);
  const auto truth = ground_truth_from_rtk(fixes, ego, !a.no_transport);
  write_records(a.out, truth);
  out << "wrote " << truth.size() << " relative states to " << a.out << '\n';
  return kExitOk;
}

int run_bench(const BenchArgs& a, std::ostream& out) {
  const LatencyReport r = bench(a.obstacles, a.cycles, a.seed);
  out << std::fixed << std::setprecision(3) << "obstacles " << a.obstacles << ", cycles "
      << a.cycles << '\n'
      << "median_us " << r.median_us << '\n'
      << "p99_us " << r.p99_us << '\n'
      << "max_us " << r.max_us << '\n'
      << "reference_us 15.000 (50 obstacles, embedded target)\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lidar/Radar GNN obstacle fusion toolkit", "fusetrack"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate a seeded car-following log bundle");
  simulate_cmd->add_option("--scenario", sim.scenario)->check(CLI::IsMember({"highway", "bend"}));
  simulate_cmd->add_option("--duration", sim.duration)->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", sim.seed);
  simulate_cmd->add_option("--out", sim.out)->required();
  simulate_cmd->add_option("--clutter", sim.clutter, "Parked obstacles along the road")->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--radar-dropout", sim.radar_dropout, "Radar target dropout START:END (s)")
      ->check(CLI::Validator(
          [](std::string& w) {
            try {
              parse_window(w);
            } catch (const InvalidInputError& e) {
              return std::string(e.what());
            }
            return std::string();
          },
          "START:END"));
  simulate_cmd->add_option("--lidar-velocity-hold", sim.lidar_velocity_hold,
                           "Hold Lidar velocities for N frames");
  simulate_cmd->add_flag("--noise-free", sim.noise_free, "Disable sensor and RTK noise");

  FuseArgs fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Run the GNN fusion over a sensor log");
  fuse_cmd->add_option("--sensors", fuse.sensors)->required();
  fuse_cmd->add_option("--ego", fuse.ego);
  fuse_cmd->add_option("--out", fuse.out)->required();
  fuse_cmd->add_option("--alpha", fuse.alpha)->check(CLI::Range(0.0, 1.0));
  fuse_cmd->add_option("--coast", fuse.coast)->check(CLI::NonNegativeNumber);
  fuse_cmd->add_option("--cost-cov", fuse.cost_covariance)->check(CLI::IsMember({"track", "track_plus_obs"}));
  fuse_cmd->add_option("--rotation", fuse.rotation)->check(CLI::IsMember({"printed", "inverse"}));
  fuse_cmd->add_flag("--keep-on-empty", fuse.keep_on_empty, "Empty frames do not delete tracks");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "MSE report of fused tracks against ground truth");
  eval_cmd->add_option("--tracks", ev.tracks)->required();
  eval_cmd->add_option("--truth", ev.truth)->required();
  eval_cmd->add_option("--report", ev.report)->check(CLI::IsMember({"csv", "json"}));
  eval_cmd->add_option("--out", ev.out);
  eval_cmd->add_option("--sensors", ev.sensors, "Raw sensor log for the Radar/Lidar rows");
  eval_cmd->add_option("--ego", ev.ego, "Odometry log for the static-object test");

  GtArgs gt;
  auto* gt_cmd = app.add_subcommand("gt", "Ground truth from two-vehicle RTK fixes");
  gt_cmd->add_option("--rtk", gt.rtk)->required();
  gt_cmd->add_option("--out", gt.out)->required();
  gt_cmd->add_option("--ego", gt.ego, "Odometry log supplying the ego yaw rate");
  gt_cmd->add_flag("--no-transport", gt.no_transport, "Skip the rotating-frame velocity term");

  BenchArgs bn;
  auto* bench_cmd = app.add_subcommand("bench", "Time the fusion step");
  bench_cmd->add_option("--obstacles", bn.obstacles)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--cycles", bn.cycles)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bn.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*simulate_cmd) return run_simulate(sim, out);
    if (*fuse_cmd) return run_fuse(fuse, out);
    if (*eval_cmd) return run_eval(ev, out);
    if (*gt_cmd) return run_gt(gt, out);
    if (*bench_cmd) return run_bench(bn, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace fusetrack
