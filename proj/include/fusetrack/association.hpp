#pragma once

#include "fusetrack/filtering.hpp"
#include "fusetrack/types.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fusetrack {

/// n_tracks x n_obs squared Mahalanobis distances; +inf marks a forbidden pair.
using CostMatrix = Eigen::MatrixXd;

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (track, obs), sorted by track index
  std::vector<int> unassigned_tracks;
  std::vector<int> unassigned_obs;
};

/// Which covariance normalizes the association distance.
enum class CostCovariance { Track, TrackPlusObs };

/// Entry (k, i) = (o_k - z_i)^T C_k^-1 (o_k - z_i), with C_k the track covariance
/// (or track covariance + obs_cov). Throws SingularInnovationError naming the track index.
CostMatrix mahalanobis_cost(std::span<const StateEstimate> tracks,
                            std::span<const Vec4> observations, const Mat4& obs_cov,
                            CostCovariance mode = CostCovariance::Track);

/// Minimum-cost one-to-one matching that saturates the smaller side. Entries that are
/// non-finite or >= forbid_above are never paired. Among equal-cost optima the pair list
/// that is lexicographically smallest is returned.
Assignment hungarian_solve(const CostMatrix& costs,
                           std::optional<double> forbid_above = std::nullopt);

/// Sum of costs over the pairs of an assignment.
double assignment_cost(const CostMatrix& costs, const Assignment& assignment);

}  // namespace fusetrack
