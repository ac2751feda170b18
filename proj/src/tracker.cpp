#include "fusetrack/tracker.hpp"

#include "fusetrack/errors.hpp"
#include "logging.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace fusetrack {

namespace {

Track make_track(std::int64_t id, const Detection& det, double t, const NoiseModel& noise) {
  Track track;
  track.id = id;
  track.state.mean = det.vector();
  track.state.cov = noise.obs_cov;
  track.age = 1;
  track.created_at = t;
  track.updated_at = t;
  track.last_sensor = noise.sensor_id;
  return track;
}

StateEstimate propagate(const StateEstimate& state, const FrameStep& frame_step,
                        const EgoMotion& ego, const Mat4& process_cov,
                        const TrackerConfig& config) {
  if (config.velocity_reference == VelocityReference::OverGround) {
    return ego_compensate(state, frame_step, process_cov, config.rotation);
  }
  const StateEstimate lifted = lift_to_over_ground(state, ego.v, ego.omega);
  const StateEstimate moved = ego_compensate(lifted, frame_step, process_cov, config.rotation);
  return lower_to_relative(moved, ego.v, ego.omega);
}

bool is_positive_definite(const Mat4& m) {
  return Eigen::LLT<Mat4>(m).info() == Eigen::Success;
}

}  // namespace

NoiseModel TrackerConfig::default_noise(SensorId id) {
  NoiseModel noise;
  noise.sensor_id = id;
  noise.process_cov = diag4(0.05, 0.05, 0.1, 0.1);
  noise.obs_cov = id == SensorId::Lidar ? diag4(0.02, 0.02, 0.5, 0.5) : diag4(0.5, 0.5, 0.02, 0.02);
  return noise;
}

void TrackerConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInputError("tracker config: alpha must lie in (0, 1)");
  if (gate_dof < 1) throw InvalidInputError("tracker config: gate_dof must be >= 1");
  if (coast_cycles < 0) throw InvalidInputError("tracker config: coast_cycles must be >= 0");
  for (const NoiseModel* noise : {&lidar, &radar}) {
    const std::string name(to_string(noise->sensor_id));
    if (!is_finite(noise->obs_cov) || !is_positive_definite(noise->obs_cov)) {
      throw InvalidInputError("tracker config: " + name + " obs_cov must be positive definite");
    }
    if (!is_finite(noise->process_cov) ||
        (noise->process_cov - noise->process_cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw InvalidInputError("tracker config: " + name + " process_cov must be symmetric");
    }
  }
}

FusedList init_list(const SensorFrame& frame, const NoiseModel& noise) {
  FusedList list;
  list.t = frame.t;
  list.sensor_id = frame.sensor_id;
  list.tracks.reserve(frame.detections.size());
  for (const Detection& det : frame.detections) {
    list.tracks.push_back(make_track(list.next_id++, det, frame.t, noise));
  }
  return list;
}

FusedList step(const FusedList& list, const SensorFrame& frame, const EgoMotion& ego,
               const TrackerConfig& config, StepStats* stats) {
  if (!std::isfinite(frame.t) || !(frame.t > list.t)) {
    throw StaleFrameError("frame at t=" + std::to_string(frame.t) +
                          " is not newer than fused list at t=" + std::to_string(list.t));
  }
  StepStats local;
  StepStats& st = stats ? *stats : local;
  st = StepStats{};

  const NoiseModel& noise = config.noise(frame.sensor_id);
  const FrameStep frame_step = FrameStep::from_ego(ego, frame.t - list.t);

  FusedList out;
  out.t = frame.t;
  out.sensor_id = frame.sensor_id;
  out.next_id = list.next_id;

  const std::size_t n_tracks = list.tracks.size();
  const std::size_t n_obs = frame.detections.size();

  std::vector<Track> predicted = list.tracks;
  for (Track& track : predicted) {
    track.state = propagate(track.state, frame_step, ego, noise.process_cov, config);
  }

  if (n_obs == 0 && !config.empty_frame_deletes) {
    out.tracks = std::move(predicted);
    return out;
  }

  std::vector<StateEstimate> states;
  states.reserve(n_tracks);
  for (const Track& track : predicted) states.push_back(track.state);
  std::vector<Vec4> observations;
  observations.reserve(n_obs);
  for (const Detection& det : frame.detections) observations.push_back(det.vector());

  CostMatrix costs;
  try {
    costs = mahalanobis_cost(states, observations, noise.obs_cov, config.cost_covariance);
  } catch (const SingularInnovationError&) {
    for (const Track& track : predicted) {
      const Mat4 cov = config.cost_covariance == CostCovariance::Track
                           ? track.state.cov
                           : Mat4(track.state.cov + noise.obs_cov);
      if (!is_positive_definite(cov)) {
        throw SingularInnovationError("track " + std::to_string(track.id) +
                                      ": covariance is not positive definite");
      }
    }
    throw;
  }

  const double gamma = config.gate_threshold();
  const Assignment assignment =
      hungarian_solve(costs, config.gate_before_assignment ? std::optional<double>(gamma)
                                                           : std::nullopt);

  std::vector<char> track_associated(n_tracks, 0);
  std::vector<char> obs_associated(n_obs, 0);
  for (const auto& [k, i] : assignment.pairs) {
    if (!(costs(k, i) < gamma)) {
      ++st.rejected_pairs;
      continue;
    }
    Track& track = predicted[static_cast<std::size_t>(k)];
    try {
      track.state = kalman_update(track.state, observations[static_cast<std::size_t>(i)],
                                  noise.obs_cov)
                        .state;
    } catch (const SingularInnovationError&) {
      throw SingularInnovationError("track " + std::to_string(track.id) +
                                    ": innovation covariance is not positive definite");
    }
    track.age += 1;
    track.updated_at = frame.t;
    track.last_sensor = frame.sensor_id;
    track.misses = 0;
    track_associated[static_cast<std::size_t>(k)] = 1;
    obs_associated[static_cast<std::size_t>(i)] = 1;
    ++st.gated_pairs;
  }

  out.tracks.reserve(n_tracks + n_obs);
  for (std::size_t k = 0; k < n_tracks; ++k) {
    Track& track = predicted[k];
    if (!track_associated[k]) {
      track.misses += 1;
      if (track.misses > config.coast_cycles) {
        ++st.removed;
        continue;
      }
      ++st.coasted;
    }
    out.tracks.push_back(std::move(track));
  }
  for (std::size_t i = 0; i < n_obs; ++i) {
    if (obs_associated[i]) continue;
    out.tracks.push_back(make_track(out.next_id++, frame.detections[i], frame.t, noise));
    ++st.spawned;
  }
  return out;
}

ProcessResult process_log(std::span<const SensorFrame> frames, std::span<const EgoMotion> ego,
                          const TrackerConfig& config) {
  config.validate();
  ProcessResult result;
  result.lists.reserve(frames.size());
  std::optional<FusedList> current;
  std::size_t ego_index = 0;
  std::optional<EgoMotion> latest_ego;

  for (const SensorFrame& frame : frames) {
    while (ego_index < ego.size() && ego[ego_index].t <= frame.t) {
      latest_ego = ego[ego_index++];
    }
    EgoMotion motion{frame.t, 0.0, 0.0};
    if (latest_ego) {
      motion = *latest_ego;
    } else {
      ++result.missing_ego_warnings;
    }

    if (!current) {
      current = init_list(frame, config.noise(frame.sensor_id));
    } else {
      try {
        current = step(*current, frame, motion, config);
      } catch (const StaleFrameError& e) {
        ++result.dropped_stale_frames;
        log::debug("dropping frame: {}", e.what());
        continue;
      }
    }
    result.lists.push_back(*current);
  }
  if (result.dropped_stale_frames > 0) {
    log::warn("dropped {} stale frame(s)", result.dropped_stale_frames);
  }
  if (result.missing_ego_warnings > 0) {
    log::warn("{} frame(s) had no prior ego motion; assumed v = omega = 0",
              result.missing_ego_warnings);
  }
  return result;
}

}  // namespace fusetrack
