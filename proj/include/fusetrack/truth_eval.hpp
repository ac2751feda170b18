#pragma once

#include "fusetrack/tracker.hpp"
#include "fusetrack/types.hpp"

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fusetrack {

enum class Vehicle { Ego, Target };

/// Global RTK fix in the reference frame R0; heading is counter-clockwise from +x.
struct RtkFix {
  double t = 0.0;
  Vehicle vehicle = Vehicle::Ego;
  double px = 0.0;
  double py = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  std::optional<double> heading;
};

/// Target kinematics in the ego frame. Velocity is the time derivative of the
/// relative position as seen from the rotating ego frame.
struct RelativeState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  friend bool operator==(const RelativeState&, const RelativeState&) = default;
};

enum class Quantity { X, Y, Vx, Vy };
inline constexpr std::array<Quantity, 4> kQuantities{Quantity::X, Quantity::Y, Quantity::Vx,
                                                     Quantity::Vy};
std::string_view to_string(Quantity q);
double quantity_of(const RelativeState& s, Quantity q);

enum class Source { Radar, Lidar, Fusion };
inline constexpr std::array<Source, 3> kSources{Source::Radar, Source::Lidar, Source::Fusion};
std::string_view to_string(Source s);

/// Composition of movements: target state in the ego frame from two global fixes taken
/// at the same instant. With include_transport the rotating-frame term -omega x r is
/// subtracted from the rotated velocity difference.
RelativeState relative_state(const RtkFix& ego, const RtkFix& target, double omega,
                             bool include_transport = true);

/// Samples (t, value) ordered by t.
template <typename T>
using TimeSeries = std::vector<std::pair<double, T>>;

std::optional<double> interpolate(const TimeSeries<double>& series, double t, double max_gap);

/// Interpolates every field of a RelativeState series.
std::optional<RelativeState> interpolate(std::span<const RelativeState> series, double t,
                                         double max_gap);

/// Nearest object (by x/y distance to the truth) whose estimated ground speed exceeds
/// static_threshold. Ground velocity is the relative velocity plus the ego contribution
/// (ego_speed, 0) + ego_omega * (-y, x).
std::optional<std::size_t> match_target(std::span<const Detection> objects,
                                        const RelativeState& truth, double ego_speed,
                                        double static_threshold, double ego_omega = 0.0,
                                        double max_distance = std::numeric_limits<double>::infinity());
std::optional<std::size_t> match_target(const FusedList& list, const RelativeState& truth,
                                        double ego_speed, double static_threshold,
                                        double ego_omega = 0.0,
                                        double max_distance = std::numeric_limits<double>::infinity());

/// (1/N) sum (q_sensor - q_truth)^2 with truth interpolated at each sensor sample time.
/// Throws UndefinedMseError when no sample can be paired.
double mse(std::span<const RelativeState> sensor, std::span<const RelativeState> truth,
           Quantity quantity, double max_gap = 0.5);

/// Diagonal noise covariance: inflation x unbiased per-component residual variance.
Mat4 estimate_noise_cov(std::span<const std::pair<Vec4, Vec4>> paired, double inflation = 1.5);

struct MseEntry {
  Source source = Source::Fusion;
  Quantity quantity = Quantity::X;
  double mse = 0.0;  // NaN when n == 0
  std::size_t n = 0;
  double availability = 0.0;
};

struct MseReport {
  std::vector<MseEntry> entries;  // source-major, kSources x kQuantities
  const MseEntry& at(Source s, Quantity q) const;
};

struct EvalConfig {
  double static_threshold = 0.5;
  double max_gap = 0.5;
  double max_match_distance = 5.0;
};

/// Target observations of one source: matched states plus the number of outputs examined
/// (only outputs with interpolable truth count toward availability).
struct MatchedSeries {
  std::vector<RelativeState> samples;
  std::size_t outputs = 0;
  double availability() const {
    return outputs == 0 ? 0.0 : static_cast<double>(samples.size()) / static_cast<double>(outputs);
  }
};

/// Ego speed/yaw rate (latest record <= t); zero when the stream is empty.
EgoMotion ego_at(std::span<const EgoMotion> ego, double t);

MatchedSeries match_series(std::span<const SensorFrame> frames, std::span<const RelativeState> truth,
                           std::span<const EgoMotion> ego, const EvalConfig& config);
MatchedSeries match_series(std::span<const FusedList> lists, std::span<const RelativeState> truth,
                           std::span<const EgoMotion> ego, const EvalConfig& config);

/// MSE and availability for every source x quantity. Sources with no matched sample get
/// n = 0 and NaN mse.
MseReport evaluate(const MatchedSeries& radar, const MatchedSeries& lidar,
                   const MatchedSeries& fusion, std::span<const RelativeState> truth,
                   const EvalConfig& config);

std::string report_csv(const MseReport& report);
std::string report_json(const MseReport& report);

/// Pairs ego and target fixes by timestamp and recomposes the relative trajectory.
/// omega at each fix is interpolated from the odometry stream when given, otherwise
/// estimated from the ego heading by central differences.
std::vector<RelativeState> ground_truth_from_rtk(std::span<const RtkFix> fixes,
                                                 std::span<const EgoMotion> ego,
                                                 bool include_transport = true);

}  // namespace fusetrack
