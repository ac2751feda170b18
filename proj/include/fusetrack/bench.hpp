#pragma once

#include "fusetrack/tracker.hpp"

#include <cstdint>
#include <vector>

namespace fusetrack {

struct LatencyReport {
  std::vector<double> samples_us;  // one per timed step() call
  double median_us = 0.0;
  double p99_us = 0.0;
  double max_us = 0.0;
  std::size_t final_tracks = 0;
};

/// Times tracker::step over pre-generated alternating Lidar/Radar frames carrying
/// n_obstacles persistent objects. Throws InvalidInputError if n_obstacles < 1 or
/// n_cycles < 1.
LatencyReport bench(int n_obstacles, int n_cycles, std::uint64_t seed,
                    const TrackerConfig& config = {});

}  // namespace fusetrack
