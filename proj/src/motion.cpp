#include "fusetrack/motion.hpp"

#include "fusetrack/errors.hpp"

#include <cmath>

namespace fusetrack {

namespace {

// Linear part of the relative -> over-ground map, with sign +1 for lift and -1 for lower.
Mat4 transport_jacobian(double omega, double sign) {
  Mat4 a = Mat4::Identity();
  a(2, 1) = -sign * omega;
  a(3, 0) = sign * omega;
  return a;
}

StateEstimate apply_transport(const StateEstimate& in, double ego_speed, double ego_omega,
                              double sign) {
  if (!std::isfinite(ego_speed) || !std::isfinite(ego_omega)) {
    throw InvalidInputError("velocity transport: non-finite ego motion");
  }
  StateEstimate out;
  if (ego_omega == 0.0) {
    out = in;
    out.mean(2) += sign * ego_speed;
    return out;
  }
  const Mat4 a = transport_jacobian(ego_omega, sign);
  Vec4 offset = Vec4::Zero();
  offset(2) = sign * ego_speed;
  out.mean = a * in.mean + offset;
  out.cov = symmetrized(a * in.cov * a.transpose());
  return out;
}

}  // namespace

FrameStep::FrameStep(double delta, double v, double omega)
    : delta_(delta), speed_(v), omega_(omega), theta_(omega * delta), distance_(v * delta) {
  if (!std::isfinite(delta) || !std::isfinite(v) || !std::isfinite(omega)) {
    throw InvalidInputError("FrameStep: non-finite input");
  }
  if (!(delta > 0.0)) throw InvalidInputError("FrameStep: delta must be > 0");
}

Mat4 cv_transition(double delta) {
  if (!std::isfinite(delta) || !(delta > 0.0)) {
    throw InvalidInputError("cv_transition: delta must be finite and > 0");
  }
  Mat4 f = Mat4::Identity();
  f(0, 2) = delta;
  f(1, 3) = delta;
  return f;
}

StateEstimate ego_compensate(const StateEstimate& track, const FrameStep& step,
                             const Mat4& process_cov, RotationConvention rotation) {
  if (!is_finite(track.mean) || !is_finite(track.cov) || !is_finite(process_cov)) {
    throw InvalidInputError("ego_compensate: non-finite input");
  }
  const double theta = step.theta();
  const double dt = step.delta();
  const double d = step.distance();
  const Mat4 f = cv_transition(dt);
  const Mat4 b = block_rotation(rotation == RotationConvention::AsPrinted ? theta : -theta);

  Vec4 moved = f * track.mean;
  moved(0) -= d * std::cos(theta);
  moved(1) -= d * std::sin(theta);

  StateEstimate out;
  out.mean = b * moved;
  out.cov = symmetrized(b * (f * track.cov * f.transpose() + process_cov) * b.transpose());
  return out;
}

StateEstimate lift_to_over_ground(const StateEstimate& relative, double ego_speed,
                                  double ego_omega) {
  return apply_transport(relative, ego_speed, ego_omega, 1.0);
}

StateEstimate lower_to_relative(const StateEstimate& over_ground, double ego_speed,
                                double ego_omega) {
  return apply_transport(over_ground, ego_speed, ego_omega, -1.0);
}

}  // namespace fusetrack
