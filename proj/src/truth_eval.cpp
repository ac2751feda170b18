#include "fusetrack/truth_eval.hpp"

#include "fusetrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace fusetrack {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ground_speed(const Detection& obj, double ego_speed, double ego_omega) {
  const double gx = obj.vx + ego_speed - ego_omega * obj.y;
  const double gy = obj.vy + ego_omega * obj.x;
  return std::hypot(gx, gy);
}

template <typename Objects>
std::optional<std::size_t> nearest_moving(const Objects& objects, const RelativeState& truth,
                                          double ego_speed, double static_threshold,
                                          double ego_omega, double max_distance) {
  std::optional<std::size_t> best;
  double best_dist = max_distance;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const Detection& obj = objects[i];
    if (!(ground_speed(obj, ego_speed, ego_omega) > static_threshold)) continue;
    const double dist = std::hypot(obj.x - truth.x, obj.y - truth.y);
    if (dist < best_dist || (!best && dist <= best_dist)) {
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

std::vector<Detection> as_detections(const FusedList& list) {
  std::vector<Detection> out;
  out.reserve(list.tracks.size());
  for (const Track& track : list.tracks) out.push_back(Detection::from_vector(track.state.mean));
  return out;
}

RelativeState to_relative(double t, const Detection& d) { return {t, d.x, d.y, d.vx, d.vy}; }

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::X: return "x";
    case Quantity::Y: return "y";
    case Quantity::Vx: return "vx";
    case Quantity::Vy: return "vy";
  }
  return "?";
}

std::string_view to_string(Source s) {
  switch (s) {
    case Source::Radar: return "radar";
    case Source::Lidar: return "lidar";
    case Source::Fusion: return "fusion";
  }
  return "?";
}

double quantity_of(const RelativeState& s, Quantity q) {
  switch (q) {
    case Quantity::X: return s.x;
    case Quantity::Y: return s.y;
    case Quantity::Vx: return s.vx;
    case Quantity::Vy: return s.vy;
  }
  return kNaN;
}

RelativeState relative_state(const RtkFix& ego, const RtkFix& target, double omega,
                             bool include_transport) {
  if (!ego.heading) throw InvalidInputError("relative_state: ego fix has no heading");
  const Mat2 to_ego = rotation2(-*ego.heading);
  const Vec2 r = to_ego * Vec2(target.px - ego.px, target.py - ego.py);
  Vec2 v = to_ego * Vec2(target.vx - ego.vx, target.vy - ego.vy);
  if (include_transport) v -= omega * Vec2(-r.y(), r.x());
  return {ego.t, r.x(), r.y(), v.x(), v.y()};
}

std::optional<double> interpolate(const TimeSeries<double>& series, double t, double max_gap) {
  if (series.empty() || t < series.front().first || t > series.back().first) return std::nullopt;
  const auto upper = std::upper_bound(series.begin(), series.end(), t,
                                      [](double value, const auto& s) { return value < s.first; });
  const auto& prev = *std::prev(upper);
  if (prev.first == t) return prev.second;
  const auto& next = *upper;
  const double gap = next.first - prev.first;
  if (gap > max_gap) return std::nullopt;
  const double w = (t - prev.first) / gap;
  return prev.second + w * (next.second - prev.second);
}

std::optional<RelativeState> interpolate(std::span<const RelativeState> series, double t,
                                         double max_gap) {
  if (series.empty() || t < series.front().t || t > series.back().t) return std::nullopt;
  const auto upper = std::upper_bound(series.begin(), series.end(), t,
                                      [](double value, const RelativeState& s) { return value < s.t; });
  const RelativeState& prev = *std::prev(upper);
  if (prev.t == t) return prev;
  const RelativeState& next = *upper;
  const double gap = next.t - prev.t;
  if (gap > max_gap) return std::nullopt;
  const double w = (t - prev.t) / gap;
  auto lerp = [w](double a, double b) { return a + w * (b - a); };
  return RelativeState{t, lerp(prev.x, next.x), lerp(prev.y, next.y), lerp(prev.vx, next.vx),
                       lerp(prev.vy, next.vy)};
}

std::optional<std::size_t> match_target(std::span<const Detection> objects,
                                        const RelativeState& truth, double ego_speed,
                                        double static_threshold, double ego_omega,
                                        double max_distance) {
  return nearest_moving(objects, truth, ego_speed, static_threshold, ego_omega, max_distance);
}

std::optional<std::size_t> match_target(const FusedList& list, const RelativeState& truth,
                                        double ego_speed, double static_threshold,
                                        double ego_omega, double max_distance) {
  const std::vector<Detection> objects = as_detections(list);
  return nearest_moving(objects, truth, ego_speed, static_threshold, ego_omega, max_distance);
}

double mse(std::span<const RelativeState> sensor, std::span<const RelativeState> truth,
           Quantity quantity, double max_gap) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const RelativeState& s : sensor) {
    const auto ref = interpolate(truth, s.t, max_gap);
    if (!ref) continue;
    const double err = quantity_of(s, quantity) - quantity_of(*ref, quantity);
    sum += err * err;
    ++n;
  }
  if (n == 0) {
    throw UndefinedMseError("mse on " + std::string(to_string(quantity)) +
                            ": no sample overlaps the ground truth");
  }
  return sum / static_cast<double>(n);
}

Mat4 estimate_noise_cov(std::span<const std::pair<Vec4, Vec4>> paired, double inflation) {
  if (paired.size() < 2) {
    throw InsufficientDataError("estimate_noise_cov: at least 2 pairs are required");
  }
  if (!(inflation > 0.0) || !std::isfinite(inflation)) {
    throw InvalidInputError("estimate_noise_cov: inflation must be positive");
  }
  Vec4 mean = Vec4::Zero();
  for (const auto& [sensor, truth] : paired) mean += sensor - truth;
  const double n = static_cast<double>(paired.size());
  mean /= n;
  Vec4 var = Vec4::Zero();
  for (const auto& [sensor, truth] : paired) var += (sensor - truth - mean).cwiseAbs2();
  var /= n - 1.0;
  return Mat4((inflation * var).asDiagonal());
}

const MseEntry& MseReport::at(Source s, Quantity q) const {
  for (const MseEntry& e : entries)
    if (e.source == s && e.quantity == q) return e;
  throw InvalidInputError("MseReport: missing entry");
}

EgoMotion ego_at(std::span<const EgoMotion> ego, double t) {
  const auto upper = std::upper_bound(ego.begin(), ego.end(), t,
                                      [](double value, const EgoMotion& e) { return value < e.t; });
  if (upper == ego.begin()) return {t, 0.0, 0.0};
  return *std::prev(upper);
}

MatchedSeries match_series(std::span<const SensorFrame> frames, std::span<const RelativeState> truth,
                           std::span<const EgoMotion> ego, const EvalConfig& config) {
  MatchedSeries out;
  for (const SensorFrame& frame : frames) {
    const auto ref = interpolate(truth, frame.t, config.max_gap);
    if (!ref) continue;
    ++out.outputs;
    const EgoMotion motion = ego_at(ego, frame.t);
    const auto idx = match_target(frame.detections, *ref, motion.v, config.static_threshold,
                                  motion.omega, config.max_match_distance);
    if (idx) out.samples.push_back(to_relative(frame.t, frame.detections[*idx]));
  }
  return out;
}

MatchedSeries match_series(std::span<const FusedList> lists, std::span<const RelativeState> truth,
                           std::span<const EgoMotion> ego, const EvalConfig& config) {
  MatchedSeries out;
  for (const FusedList& list : lists) {
    const auto ref = interpolate(truth, list.t, config.max_gap);
    if (!ref) continue;
    ++out.outputs;
    const EgoMotion motion = ego_at(ego, list.t);
    const std::vector<Detection> objects = as_detections(list);
    const auto idx = match_target(std::span<const Detection>(objects), *ref, motion.v,
                                  config.static_threshold, motion.omega, config.max_match_distance);
    if (idx) out.samples.push_back(to_relative(list.t, objects[*idx]));
  }
  return out;
}

MseReport evaluate(const MatchedSeries& radar, const MatchedSeries& lidar,
                   const MatchedSeries& fusion, std::span<const RelativeState> truth,
                   const EvalConfig& config) {
  MseReport report;
  for (Source source : kSources) {
    const MatchedSeries& series =
        source == Source::Radar ? radar : (source == Source::Lidar ? lidar : fusion);
    for (Quantity q : kQuantities) {
      MseEntry entry{source, q, kNaN, series.samples.size(), series.availability()};
      if (!series.samples.empty()) entry.mse = mse(series.samples, truth, q, config.max_gap);
      report.entries.push_back(entry);
    }
  }
  return report;
}

std::string report_csv(const MseReport& report) {
  std::ostringstream os;
  os << "source,quantity,mse,n,availability\n";
  for (const MseEntry& e : report.entries) {
    os << to_string(e.source) << ',' << to_string(e.quantity) << ',' << format_number(e.mse) << ','
       << e.n << ',' << format_number(e.availability) << '\n';
  }
  return os.str();
}

std::string report_json(const MseReport& report) {
  std::ostringstream os;
  os << "{\"entries\":[";
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const MseEntry& e = report.entries[i];
    if (i) os << ',';
    os << "{\"source\":\"" << to_string(e.source) << "\",\"quantity\":\"" << to_string(e.quantity)
       << "\",\"mse\":" << (std::isnan(e.mse) ? std::string("null") : format_number(e.mse))
       << ",\"n\":" << e.n << ",\"availability\":" << format_number(e.availability) << '}';
  }
  os << "]}\n";
  return os.str();
}

std::vector<RelativeState> ground_truth_from_rtk(std::span<const RtkFix> fixes,
                                                 std::span<const EgoMotion> ego,
                                                 bool include_transport) {
  std::vector<RtkFix> ego_fixes;
  std::vector<RtkFix> target_fixes;
  for (const RtkFix& fix : fixes) {
    (fix.vehicle == Vehicle::Ego ? ego_fixes : target_fixes).push_back(fix);
  }
  auto by_time = [](const RtkFix& a, const RtkFix& b) { return a.t < b.t; };
  std::stable_sort(ego_fixes.begin(), ego_fixes.end(), by_time);
  std::stable_sort(target_fixes.begin(), target_fixes.end(), by_time);

  TimeSeries<double> omega_series;
  for (const EgoMotion& e : ego) omega_series.emplace_back(e.t, e.omega);

  std::vector<RelativeState> out;
  out.reserve(ego_fixes.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < ego_fixes.size(); ++i) {
    const RtkFix& e = ego_fixes[i];
    if (!e.heading) throw InvalidInputError("ground truth: ego fix without heading");
    while (j < target_fixes.size() && target_fixes[j].t < e.t) ++j;
    if (j >= target_fixes.size() || target_fixes[j].t != e.t) continue;

    double omega = 0.0;
    if (!omega_series.empty()) {
      const auto w = interpolate(omega_series, e.t, 0.5);
      if (!w) continue;
      omega = *w;
    } else if (ego_fixes.size() >= 2) {
      const RtkFix& a = ego_fixes[i == 0 ? 0 : i - 1];
      const RtkFix& b = ego_fixes[i + 1 < ego_fixes.size() ? i + 1 : i];
      if (!a.heading || !b.heading || b.t <= a.t) continue;
      omega = wrap_angle(*b.heading - *a.heading) / (b.t - a.t);
    }
    out.push_back(relative_state(e, target_fixes[j], omega, include_transport));
  }
  return out;
}

}  // namespace fusetrack
