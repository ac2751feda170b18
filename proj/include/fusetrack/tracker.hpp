#pragma once

#include "fusetrack/association.hpp"
#include "fusetrack/filtering.hpp"
#include "fusetrack/motion.hpp"
#include "fusetrack/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fusetrack {

struct Detection {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;

  Vec4 vector() const { return {x, y, vx, vy}; }
  static Detection from_vector(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct SensorFrame {
  double t = 0.0;
  SensorId sensor_id = SensorId::Lidar;
  std::vector<Detection> detections;
};

struct Track {
  std::int64_t id = 0;
  StateEstimate state;
  int age = 1;
  double created_at = 0.0;
  double updated_at = 0.0;
  SensorId last_sensor = SensorId::Lidar;
  int misses = 0;  // consecutive cycles without an associated detection
};

struct FusedList {
  double t = 0.0;
  SensorId sensor_id = SensorId::Lidar;  // sensor of the frame that produced this list
  std::vector<Track> tracks;
  std::int64_t next_id = 0;
};

/// How detection velocities are referenced. Relative velocities are lifted to
/// over-ground velocities around ego compensation and lowered back afterwards.
enum class VelocityReference { Relative, OverGround };

struct TrackerConfig {
  double alpha = kDefaultGateAlpha;
  int gate_dof = kStateDof;
  int coast_cycles = 0;
  bool empty_frame_deletes = true;
  /// Additionally forbid pairs at or above the gate inside the assignment.
  bool gate_before_assignment = false;
  CostCovariance cost_covariance = CostCovariance::Track;
  RotationConvention rotation = RotationConvention::FrameInverse;
  VelocityReference velocity_reference = VelocityReference::Relative;
  NoiseModel lidar = default_noise(SensorId::Lidar);
  NoiseModel radar = default_noise(SensorId::Radar);

  const NoiseModel& noise(SensorId id) const { return id == SensorId::Lidar ? lidar : radar; }
  double gate_threshold() const { return chi2_gate_threshold(alpha, gate_dof); }
  /// Throws InvalidInputError on out-of-range fields or non-PD obs covariances.
  void validate() const;

  static NoiseModel default_noise(SensorId id);
};

/// Per-step bookkeeping, mostly for tests and diagnostics.
struct StepStats {
  int gated_pairs = 0;
  int rejected_pairs = 0;
  int spawned = 0;
  int removed = 0;
  int coasted = 0;
};

FusedList init_list(const SensorFrame& frame, const NoiseModel& noise);

/// One GNN fusion cycle. Throws StaleFrameError when frame.t <= list.t; the input
/// list is never modified.
FusedList step(const FusedList& list, const SensorFrame& frame, const EgoMotion& ego,
               const TrackerConfig& config, StepStats* stats = nullptr);

struct ProcessResult {
  std::vector<FusedList> lists;
  int dropped_stale_frames = 0;
  int missing_ego_warnings = 0;
};

/// Replays time-ordered sensor frames against the odometry stream. The ego motion for
/// a frame is the latest record with t <= frame.t (zero motion if none exists).
ProcessResult process_log(std::span<const SensorFrame> frames, std::span<const EgoMotion> ego,
                          const TrackerConfig& config);

}  // namespace fusetrack
