#include "fusetrack/bench.hpp"

#include "fusetrack/errors.hpp"
#include "fusetrack/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace fusetrack {

namespace {

struct Obstacle {
  Vec4 state;
};

double percentile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

LatencyReport bench(int n_obstacles, int n_cycles, std::uint64_t seed, const TrackerConfig& config) {
  if (n_obstacles < 1) throw InvalidInputError("bench: n_obstacles must be >= 1");
  if (n_cycles < 1) throw InvalidInputError("bench: n_cycles must be >= 1");
  config.validate();

  RandomStream rng(seed, 0xBE);
  std::vector<Obstacle> obstacles;
  const int columns = static_cast<int>(std::ceil(std::sqrt(n_obstacles)));
  // The grid drifts as one formation so objects never cross over long runs.
  const Vec2 drift(0.5 * rng.normal(), 0.5 * rng.normal());
  for (int i = 0; i < n_obstacles; ++i) {
    const double x = 10.0 + 8.0 * (i / columns);
    const double y = -20.0 + 8.0 * (i % columns);
    obstacles.push_back({Vec4(x, y, drift.x(), drift.y())});
  }

  // Frames are generated up front so the timed loop only runs step().
  constexpr double period = 0.04;
  std::vector<SensorFrame> frames(static_cast<std::size_t>(n_cycles) + 1);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    SensorFrame& frame = frames[k];
    frame.t = static_cast<double>(k) * period;
    frame.sensor_id = k % 2 == 0 ? SensorId::Lidar : SensorId::Radar;
    const Mat4 factor = Eigen::LLT<Mat4>(config.noise(frame.sensor_id).obs_cov).matrixL();
    for (const Obstacle& o : obstacles) {
      Vec4 truth = o.state;
      truth.head<2>() += frame.t * o.state.tail<2>();
      Vec4 noise;
      for (int c = 0; c < 4; ++c) noise(c) = rng.normal();
      frame.detections.push_back(Detection::from_vector(truth + factor * noise));
    }
  }

  // Straight ego drive keeps relative motion constant-velocity while exercising the
  // full compensation path.
  const EgoMotion ego{0.0, 25.0, 0.0};
  FusedList list = init_list(frames.front(), config.noise(frames.front().sensor_id));
  LatencyReport report;
  report.samples_us.reserve(static_cast<std::size_t>(n_cycles));
  for (std::size_t k = 1; k < frames.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    list = step(list, frames[k], ego, config);
    const auto stop = std::chrono::steady_clock::now();
    report.samples_us.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
  }
  report.median_us = percentile(report.samples_us, 0.5);
  report.p99_us = percentile(report.samples_us, 0.99);
  report.max_us = *std::max_element(report.samples_us.begin(), report.samples_us.end());
  report.final_tracks = list.tracks.size();
  return report;
}

}  // namespace fusetrack
