#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string_view>

namespace fusetrack {

/// Obstacle state layout: [x, y, vx, vy] in the ego frame.
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class SensorId { Lidar, Radar };

constexpr std::string_view to_string(SensorId id) {
  return id == SensorId::Lidar ? "lidar" : "radar";
}

std::optional<SensorId> parse_sensor_id(std::string_view name);

inline Mat4 diag4(double a, double b, double c, double d) {
  return Vec4(a, b, c, d).asDiagonal();
}

inline Mat2 rotation2(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

/// blockdiag(R, R): rotates position and velocity halves of a state together.
inline Mat4 block_rotation(double angle) {
  Mat4 b = Mat4::Zero();
  const Mat2 r = rotation2(angle);
  b.topLeftCorner<2, 2>() = r;
  b.bottomRightCorner<2, 2>() = r;
  return b;
}

inline Mat4 symmetrized(const Mat4& m) { return 0.5 * (m + m.transpose()); }

}  // namespace fusetrack
