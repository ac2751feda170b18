#pragma once

#include "fusetrack/types.hpp"

namespace fusetrack {

struct StateEstimate {
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Identity();
};

/// Per-sensor noise: process_cov is P_S (added on prediction), obs_cov is N_S.
struct NoiseModel {
  Mat4 process_cov = Mat4::Zero();
  Mat4 obs_cov = Mat4::Identity();
  SensorId sensor_id = SensorId::Lidar;
};

struct Innovation {
  Vec4 residual = Vec4::Zero();
  Mat4 cov = Mat4::Identity();
  double d2 = 0.0;
};

struct UpdateResult {
  StateEstimate state;
  Innovation innovation;
};

/// Default validation gate: P(chi2_4 < gamma) = 0.9.
inline constexpr double kDefaultGateAlpha = 0.9;
inline constexpr int kStateDof = 4;

StateEstimate kalman_predict(const StateEstimate& state, const Mat4& transition,
                             const Mat4& process_cov);

/// Kalman correction with the identity observation model (H = I).
/// Throws SingularInnovationError if S = cov + obs_cov is not positive definite.
UpdateResult kalman_update(const StateEstimate& predicted, const Vec4& z,
                           const Mat4& obs_cov);

/// Normalized innovation nu^T S^-1 nu.
double gate_distance(const Innovation& innovation);

/// Squared Mahalanobis distance of `diff` under `cov`, via Cholesky.
double mahalanobis_squared(const Vec4& diff, const Mat4& cov);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

double chi2_cdf(double x, int dof);

/// gamma such that P(chi2_dof < gamma) = alpha.
double chi2_gate_threshold(double alpha, int dof);

bool is_finite(const Mat4& m);
bool is_finite(const Vec4& v);

}  // namespace fusetrack
