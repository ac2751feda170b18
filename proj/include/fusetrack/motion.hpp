#pragma once

#include "fusetrack/filtering.hpp"
#include "fusetrack/types.hpp"

namespace fusetrack {

/// Odometry sample: forward speed v (m/s) and yaw rate omega (rad/s, counter-clockwise positive).
struct EgoMotion {
  double t = 0.0;
  double v = 0.0;
  double omega = 0.0;
};

/// Ego displacement between two sensor frames.
class FrameStep {
 public:
  /// Throws InvalidInputError unless delta > 0 and all inputs are finite.
  FrameStep(double delta, double v, double omega);
  static FrameStep from_ego(const EgoMotion& ego, double delta) {
    return FrameStep(delta, ego.v, ego.omega);
  }

  double delta() const { return delta_; }
  double theta() const { return theta_; }
  double distance() const { return distance_; }
  double speed() const { return speed_; }
  double omega() const { return omega_; }

 private:
  double delta_;
  double speed_;
  double omega_;
  double theta_;
  double distance_;
};

/// Sense of the rotation that maps old-frame coordinates into the new frame.
///  - AsPrinted:  blockdiag(R(theta), R(theta)), the formula as usually written.
///  - FrameInverse: blockdiag(R(-theta), R(-theta)), correct for a counter-clockwise
///    yaw rate (the convention of EgoMotion and the simulator).
enum class RotationConvention { AsPrinted, FrameInverse };

/// Constant-velocity transition F(delta).
Mat4 cv_transition(double delta);

/// CV prediction in the previous ego frame followed by re-expression in the current
/// one. Velocities in `track` are over-ground velocities expressed in ego axes.
StateEstimate ego_compensate(const StateEstimate& track, const FrameStep& step,
                             const Mat4& process_cov,
                             RotationConvention rotation = RotationConvention::AsPrinted);

/// Relative velocity (time derivative of the position in the rotating ego frame)
/// to over-ground velocity in ego axes: u = w + (v, 0) + omega * (-y, x).
StateEstimate lift_to_over_ground(const StateEstimate& relative, double ego_speed,
                                  double ego_omega);

/// Inverse of lift_to_over_ground.
StateEstimate lower_to_relative(const StateEstimate& over_ground, double ego_speed,
                                double ego_omega);

}  // namespace fusetrack
