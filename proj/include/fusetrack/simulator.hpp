#pragma once

#include "fusetrack/motion.hpp"
#include "fusetrack/tracker.hpp"
#include "fusetrack/truth_eval.hpp"
#include "fusetrack/types.hpp"

#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace fusetrack {

/// Constant-curvature road piece (curvature 0 is a straight; positive turns left).
struct PathSegment {
  double length = 0.0;
  double curvature = 0.0;
};

struct PathPose {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
  double curvature = 0.0;
};

/// Arc-length parameterized road centreline starting at the origin heading +x. The last
/// segment extends indefinitely.
class RoadPath {
 public:
  explicit RoadPath(std::vector<PathSegment> segments);
  PathPose at(double s) const;
  const std::vector<PathSegment>& segments() const { return segments_; }

 private:
  std::vector<PathSegment> segments_;
  std::vector<double> start_s_;
  std::vector<PathPose> start_pose_;
};

/// value(t) = base + amplitude * sin(2 pi t / period)
struct SineProfile {
  double base = 0.0;
  double amplitude = 0.0;
  double period = 1.0;
};

struct SensorSimConfig {
  SensorId sensor_id = SensorId::Lidar;
  double rate_hz = 25.0;
  double phase = 0.0;                             // time of the first frame (s)
  double fov = 2.0 * std::numbers::pi;            // full horizontal field of view (rad)
  double max_range = 150.0;                       // m
  Mat4 obs_cov = Mat4::Identity();
  Mat4 process_cov = Mat4::Zero();                // handed to the tracker for this sensor
  std::vector<std::pair<double, double>> dropout_windows;  // [start, end) target unseen
  double dropout_probability = 0.0;               // per-frame target miss outside windows
  int velocity_hold_frames = 0;                   // > 1 holds reported velocity that long
};

enum class ScenarioKind { Highway, Bend, Custom };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Highway;
  double duration = 60.0;
  std::uint64_t seed = 0;
  std::vector<PathSegment> path;
  SineProfile ego_speed{26.4, 1.0, 30.0};         // m/s
  SineProfile target_gap{30.0, 5.0, 20.0};        // arc-length lead (m)
  std::vector<SensorSimConfig> sensors;
  double rtk_rate_hz = 50.0;
  double rtk_sigma_pos = 0.02;
  double rtk_sigma_vel = 0.02;
  double ego_rate_hz = 100.0;
  int static_clutter = 0;         // parked obstacles along the road
  double clutter_spacing = 40.0;  // m between parked obstacles
  double clutter_offset = 4.0;    // lateral offset (m, left of centreline)

  /// Lidar 25 Hz surround and Radar 15 Hz +-28 deg with the given noise.
  static ScenarioConfig highway(double duration, std::uint64_t seed);
  /// Alternating left/right arcs at urban speed.
  static ScenarioConfig bend(double duration, std::uint64_t seed);

  /// Field-level validation; throws InvalidInputError listing every problem.
  void validate() const;
  /// Tracker configuration whose per-sensor noise mirrors this scenario.
  TrackerConfig tracker_config() const;
  const SensorSimConfig* sensor(SensorId id) const;
};

struct GroundState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double heading = 0.0;
  double omega = 0.0;
};

/// Noise-free kinematics of the scenario at any time.
class ScenarioKinematics {
 public:
  explicit ScenarioKinematics(const ScenarioConfig& config);
  GroundState ego(double t) const;
  GroundState target(double t) const;
  /// Exact relative state of the target in the ego frame.
  RelativeState relative_target(double t) const;
  /// Relative state of any ground point with velocity `velocity`, seen from the ego.
  RelativeState relative_of(double t, const Vec2& position, const Vec2& velocity) const;
  std::vector<Vec2> clutter_positions() const { return clutter_; }

 private:
  GroundState on_path(double s, double s_dot) const;
  double ego_s(double t) const;
  double ego_s_dot(double t) const;

  SineProfile ego_speed_;
  SineProfile gap_;
  RoadPath path_;
  std::vector<Vec2> clutter_;
};

struct LogBundle {
  std::vector<SensorFrame> frames;  // all sensors, time-ordered
  std::vector<EgoMotion> ego;
  std::vector<RtkFix> rtk;
  std::vector<RelativeState> truth;
};

/// Deterministic for a fixed config (including seed).
LogBundle simulate(const ScenarioConfig& config);

/// Number of frames a sensor emits in [0, duration).
std::size_t frame_count(double rate_hz, double phase, double duration);

}  // namespace fusetrack
