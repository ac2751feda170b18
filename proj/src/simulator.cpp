#include "fusetrack/simulator.hpp"

#include "fusetrack/errors.hpp"
#include "fusetrack/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fusetrack {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kStraight = 1e-12;

double wrap_pi(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

double sine(const SineProfile& p, double t) {
  return p.base + p.amplitude * std::sin(kTwoPi * t / p.period);
}

double sine_rate(const SineProfile& p, double t) {
  return p.amplitude * (kTwoPi / p.period) * std::cos(kTwoPi * t / p.period);
}

// Integral of sine(p, .) over [0, t].
double sine_integral(const SineProfile& p, double t) {
  return p.base * t + p.amplitude * p.period / kTwoPi * (1.0 - std::cos(kTwoPi * t / p.period));
}

bool is_psd(const Mat4& m) {
  if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
  return Eigen::SelfAdjointEigenSolver<Mat4>(m).eigenvalues().minCoeff() >= -1e-12;
}

Mat4 noise_factor(const Mat4& cov) {
  // LDLT tolerates zero-variance components.
  const Eigen::LDLT<Mat4> ldlt(cov);
  const Mat4 l = ldlt.matrixL();
  const Vec4 d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  return ldlt.transpositionsP().transpose() * l * d.asDiagonal();
}

SensorSimConfig default_sensor(SensorId id) {
  SensorSimConfig s;
  s.sensor_id = id;
  if (id == SensorId::Lidar) {
    s.rate_hz = 25.0;
    s.phase = 0.0;
    s.fov = kTwoPi;
    s.max_range = 120.0;
    s.obs_cov = diag4(0.02, 0.02, 0.5, 0.5);
  } else {
    s.rate_hz = 15.0;
    s.phase = 0.01;
    s.fov = 2.0 * 28.0 * std::numbers::pi / 180.0;
    s.max_range = 200.0;
    s.obs_cov = diag4(0.5, 0.5, 0.02, 0.02);
  }
  s.process_cov = TrackerConfig::default_noise(id).process_cov;
  return s;
}

bool in_dropout(const SensorSimConfig& s, double t) {
  return std::any_of(s.dropout_windows.begin(), s.dropout_windows.end(),
                     [t](const auto& w) { return t >= w.first && t < w.second; });
}

std::uint64_t stream_id(SensorId id, std::uint64_t index, std::uint64_t purpose) {
  return (static_cast<std::uint64_t>(id) + 1) << 32 | index << 8 | purpose;
}

constexpr std::uint64_t kRtkEgoStream = 0xE0;
constexpr std::uint64_t kRtkTargetStream = 0xE1;

}  // namespace

RoadPath::RoadPath(std::vector<PathSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) segments_.push_back({1.0, 0.0});
  PathPose pose;
  double s = 0.0;
  for (const PathSegment& seg : segments_) {
    start_s_.push_back(s);
    pose.curvature = seg.curvature;
    start_pose_.push_back(pose);
    // advance to the end of this segment
    const double k = seg.curvature;
    const double h0 = pose.heading;
    const double h1 = h0 + k * seg.length;
    if (std::abs(k) < kStraight) {
      pose.position += seg.length * Vec2(std::cos(h0), std::sin(h0));
    } else {
      pose.position += Vec2(std::sin(h1) - std::sin(h0), std::cos(h0) - std::cos(h1)) / k;
    }
    pose.heading = h1;
    s += seg.length;
  }
}

PathPose RoadPath::at(double s) const {
  const auto it = std::upper_bound(start_s_.begin(), start_s_.end(), s);
  const std::size_t i = it == start_s_.begin() ? 0 : static_cast<std::size_t>(it - start_s_.begin()) - 1;
  const PathPose& start = start_pose_[i];
  const double ds = s - start_s_[i];
  const double k = segments_[i].curvature;
  PathPose pose;
  pose.curvature = k;
  pose.heading = start.heading + k * ds;
  if (std::abs(k) < kStraight) {
    pose.position = start.position + ds * Vec2(std::cos(start.heading), std::sin(start.heading));
  } else {
    pose.position = start.position + Vec2(std::sin(pose.heading) - std::sin(start.heading),
                                          std::cos(start.heading) - std::cos(pose.heading)) / k;
  }
  return pose;
}

ScenarioConfig ScenarioConfig::highway(double duration, std::uint64_t seed) {
  ScenarioConfig c;
  c.kind = ScenarioKind::Highway;
  c.duration = duration;
  c.seed = seed;
  c.path = {{1.0e6, 0.0}};
  c.ego_speed = {26.4, 1.0, 30.0};  // 91-99 km/h
  c.target_gap = {30.0, 5.0, 20.0};
  c.sensors = {default_sensor(SensorId::Lidar), default_sensor(SensorId::Radar)};
  c.static_clutter = 0;
  return c;
}

ScenarioConfig ScenarioConfig::bend(double duration, std::uint64_t seed) {
  ScenarioConfig c;
  c.kind = ScenarioKind::Bend;
  c.duration = duration;
  c.seed = seed;
  constexpr double radius = 60.0;
  constexpr double arc = 70.0;
  c.path = {{40.0, 0.0}};
  for (int i = 0; i < 200; ++i) c.path.push_back({arc, (i % 2 == 0 ? 1.0 : -1.0) / radius});
  c.ego_speed = {12.0, 1.0, 25.0};
  c.target_gap = {18.0, 3.0, 15.0};
  c.sensors = {default_sensor(SensorId::Lidar), default_sensor(SensorId::Radar)};
  c.static_clutter = 0;
  return c;
}

const SensorSimConfig* ScenarioConfig::sensor(SensorId id) const {
  for (const SensorSimConfig& s : sensors)
    if (s.sensor_id == id) return &s;
  return nullptr;
}

void ScenarioConfig::validate() const {
  std::vector<std::string> problems;
  auto fail = [&](const std::string& field, const std::string& what) {
    problems.push_back(field + ": " + what);
  };
  if (!(duration > 0.0) || !std::isfinite(duration)) fail("duration", "must be > 0");
  if (!(ego_speed.period > 0.0)) fail("ego_speed.period", "must be > 0");
  if (!(target_gap.period > 0.0)) fail("target_gap.period", "must be > 0");
  if (!(rtk_rate_hz > 0.0)) fail("rtk_rate_hz", "must be > 0");
  if (!(ego_rate_hz > 0.0)) fail("ego_rate_hz", "must be > 0");
  if (rtk_sigma_pos < 0.0) fail("rtk_sigma_pos", "must be >= 0");
  if (rtk_sigma_vel < 0.0) fail("rtk_sigma_vel", "must be >= 0");
  if (static_clutter < 0) fail("static_clutter", "must be >= 0");
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!(path[i].length > 0.0)) fail("path[" + std::to_string(i) + "].length", "must be > 0");
  }
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const SensorSimConfig& s = sensors[i];
    const std::string p = "sensors[" + std::to_string(i) + "].";
    if (!(s.rate_hz > 0.0) || !std::isfinite(s.rate_hz)) fail(p + "rate_hz", "must be > 0");
    if (!(s.fov > 0.0 && s.fov <= kTwoPi + 1e-12)) fail(p + "fov", "must lie in (0, 2pi]");
    if (!(s.max_range > 0.0)) fail(p + "max_range", "must be > 0");
    if (!is_psd(s.obs_cov)) fail(p + "obs_cov", "must be symmetric positive semidefinite");
    if (!is_psd(s.process_cov)) fail(p + "process_cov", "must be symmetric positive semidefinite");
    if (!(s.dropout_probability >= 0.0 && s.dropout_probability <= 1.0))
      fail(p + "dropout_probability", "must lie in [0, 1]");
    for (const auto& [a, b] : s.dropout_windows)
      if (!(b >= a)) fail(p + "dropout_windows", "end must not precede start");
    for (std::size_t j = 0; j < i; ++j)
      if (sensors[j].sensor_id == s.sensor_id) fail(p + "sensor_id", "duplicate sensor");
  }
  if (!problems.empty()) {
    std::ostringstream os;
    os << "invalid scenario config:";
    for (const std::string& msg : problems) os << "\n  " << msg;
    throw InvalidInputError(os.str());
  }
}

TrackerConfig ScenarioConfig::tracker_config() const {
  TrackerConfig cfg;
  for (const SensorSimConfig& s : sensors) {
    NoiseModel& noise = s.sensor_id == SensorId::Lidar ? cfg.lidar : cfg.radar;
    noise.obs_cov = s.obs_cov;
    noise.process_cov = s.process_cov;
  }
  return cfg;
}

ScenarioKinematics::ScenarioKinematics(const ScenarioConfig& config)
    : ego_speed_(config.ego_speed), gap_(config.target_gap), path_(config.path) {
  for (int j = 0; j < config.static_clutter; ++j) {
    const PathPose pose = path_.at(config.clutter_spacing * (j + 1));
    clutter_.push_back(pose.position +
                       config.clutter_offset * Vec2(-std::sin(pose.heading), std::cos(pose.heading)));
  }
}

double ScenarioKinematics::ego_s(double t) const { return sine_integral(ego_speed_, t); }
double ScenarioKinematics::ego_s_dot(double t) const { return sine(ego_speed_, t); }

GroundState ScenarioKinematics::on_path(double s, double s_dot) const {
  const PathPose pose = path_.at(s);
  GroundState g;
  g.position = pose.position;
  g.heading = pose.heading;
  g.velocity = s_dot * Vec2(std::cos(pose.heading), std::sin(pose.heading));
  g.omega = pose.curvature * s_dot;
  return g;
}

GroundState ScenarioKinematics::ego(double t) const { return on_path(ego_s(t), ego_s_dot(t)); }

GroundState ScenarioKinematics::target(double t) const {
  return on_path(ego_s(t) + sine(gap_, t), ego_s_dot(t) + sine_rate(gap_, t));
}

RelativeState ScenarioKinematics::relative_of(double t, const Vec2& position,
                                              const Vec2& velocity) const {
  const GroundState e = ego(t);
  const Mat2 to_ego = rotation2(-e.heading);
  const Vec2 r = to_ego * (position - e.position);
  const Vec2 v = to_ego * (velocity - e.velocity) - e.omega * Vec2(-r.y(), r.x());
  return {t, r.x(), r.y(), v.x(), v.y()};
}

RelativeState ScenarioKinematics::relative_target(double t) const {
  const GroundState g = target(t);
  return relative_of(t, g.position, g.velocity);
}

std::size_t frame_count(double rate_hz, double phase, double duration) {
  std::size_t n = 0;
  while (phase + static_cast<double>(n) / rate_hz < duration) ++n;
  return n;
}

LogBundle simulate(const ScenarioConfig& config) {
  config.validate();
  const ScenarioKinematics kin(config);
  const std::vector<Vec2> clutter = kin.clutter_positions();
  LogBundle bundle;

  for (const SensorSimConfig& s : config.sensors) {
    RandomStream noise_rng(config.seed, stream_id(s.sensor_id, 0, 1));
    RandomStream dropout_rng(config.seed, stream_id(s.sensor_id, 0, 2));
    const Mat4 factor = noise_factor(s.obs_cov);
    const std::size_t n_objects = 1 + clutter.size();
    std::vector<Vec2> held_velocity(n_objects, Vec2::Zero());
    std::vector<int> held_age(n_objects, -1);

    const std::size_t n_frames = frame_count(s.rate_hz, s.phase, config.duration);
    for (std::size_t k = 0; k < n_frames; ++k) {
      SensorFrame frame;
      frame.t = s.phase + static_cast<double>(k) / s.rate_hz;
      frame.sensor_id = s.sensor_id;
      const bool random_miss = dropout_rng.uniform() < s.dropout_probability;

      for (std::size_t obj = 0; obj < n_objects; ++obj) {
        const RelativeState truth = obj == 0 ? kin.relative_target(frame.t)
                                             : kin.relative_of(frame.t, clutter[obj - 1], Vec2::Zero());
        const double range = std::hypot(truth.x, truth.y);
        const double bearing = std::atan2(truth.y, truth.x);
        const bool visible = range <= s.max_range && std::abs(bearing) <= 0.5 * s.fov;
        if (!visible) continue;
        if (obj == 0 && (in_dropout(s, frame.t) || random_miss)) continue;

        Vec4 noise;
        for (int c = 0; c < 4; ++c) noise(c) = noise_rng.normal();
        Vec4 z = Vec4(truth.x, truth.y, truth.vx, truth.vy) + factor * noise;
        if (s.velocity_hold_frames > 1) {
          if (held_age[obj] < 0 || held_age[obj] >= s.velocity_hold_frames) {
            held_velocity[obj] = z.tail<2>();
            held_age[obj] = 0;
          }
          z.tail<2>() = held_velocity[obj];
          ++held_age[obj];
        }
        frame.detections.push_back(Detection::from_vector(z));
      }
      bundle.frames.push_back(std::move(frame));
    }
  }
  std::stable_sort(bundle.frames.begin(), bundle.frames.end(),
                   [](const SensorFrame& a, const SensorFrame& b) { return a.t < b.t; });

  const std::size_t n_ego = frame_count(config.ego_rate_hz, 0.0, config.duration);
  for (std::size_t k = 0; k < n_ego; ++k) {
    const double t = static_cast<double>(k) / config.ego_rate_hz;
    const GroundState e = kin.ego(t);
    bundle.ego.push_back({t, e.velocity.norm(), e.omega});
  }

  RandomStream ego_rng(config.seed, kRtkEgoStream);
  RandomStream target_rng(config.seed, kRtkTargetStream);
  const std::size_t n_rtk = frame_count(config.rtk_rate_hz, 0.0, config.duration);
  for (std::size_t k = 0; k < n_rtk; ++k) {
    const double t = static_cast<double>(k) / config.rtk_rate_hz;
    auto fix = [&](Vehicle vehicle, const GroundState& g, RandomStream& rng) {
      RtkFix f;
      f.t = t;
      f.vehicle = vehicle;
      f.px = g.position.x() + config.rtk_sigma_pos * rng.normal();
      f.py = g.position.y() + config.rtk_sigma_pos * rng.normal();
      f.vx = g.velocity.x() + config.rtk_sigma_vel * rng.normal();
      f.vy = g.velocity.y() + config.rtk_sigma_vel * rng.normal();
      f.heading = wrap_pi(g.heading);
      return f;
    };
    bundle.rtk.push_back(fix(Vehicle::Ego, kin.ego(t), ego_rng));
    bundle.rtk.push_back(fix(Vehicle::Target, kin.target(t), target_rng));
    bundle.truth.push_back(kin.relative_target(t));
  }
  return bundle;
}

}  // namespace fusetrack
