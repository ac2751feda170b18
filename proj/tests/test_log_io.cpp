#include "fusetrack/errors.hpp"
#include "fusetrack/log_io.hpp"
#include "fusetrack/simulator.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

namespace fusetrack {
namespace {

namespace fs = std::filesystem;

void expect_line_round_trip(const LogRecord& rec) {
  const std::string line = serialize_record(rec);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(serialize_record(parse_record(line)), line);
}

TEST(LogIo, SimulatedBundleRoundTripsLineByLine) {
  ScenarioConfig cfg = ScenarioConfig::bend(5.0, 99);
  cfg.static_clutter = 4;
  const LogBundle b = simulate(cfg);
  for (const auto& f : b.frames) expect_line_round_trip(f);
  for (const auto& e : b.ego) expect_line_round_trip(e);
  for (const auto& r : b.rtk) expect_line_round_trip(r);
  for (const auto& s : b.truth) expect_line_round_trip(s);
  const ProcessResult fused = process_log(b.frames, b.ego, {});
  for (const auto& l : fused.lists) expect_line_round_trip(l);
}

TEST(LogIo, ValuesSurviveExactly) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> mag(-300.0, 300.0);
  std::uniform_int_distribution<int> sign(0, 1);
  const auto value = [&] { return (sign(rng) ? -1.0 : 1.0) * std::pow(10.0, mag(rng)); };
  for (int i = 0; i < 500; ++i) {
    SensorFrame f{value(), SensorId::Radar, {{value(), value(), value(), value()}, {0.0, -0.0, 5e-324, 1.0 / 3.0}}};
    const auto parsed = std::get<SensorFrame>(parse_record(serialize_record(f)));
    EXPECT_EQ(parsed.t, f.t);
    EXPECT_EQ(parsed.sensor_id, f.sensor_id);
    EXPECT_EQ(parsed.detections, f.detections);
  }
}

TEST(LogIo, FusedListFieldsPreserved) {
  FusedList l;
  l.t = 2.5;
  l.sensor_id = SensorId::Radar;
  l.next_id = 17;
  Track tr;
  tr.id = 16;
  tr.state.mean = Vec4(1, 2, 3, 4);
  tr.state.cov << 1, 0.1, 0, 0, 0.1, 2, 0, 0.3, 0, 0, 3, 0, 0, 0.3, 0, 4;
  tr.age = 5;
  tr.created_at = 1.0;
  tr.updated_at = 2.46;
  tr.last_sensor = SensorId::Lidar;
  tr.misses = 1;
  l.tracks = {tr};
  const auto back = std::get<FusedList>(parse_record(serialize_record(l)));
  ASSERT_EQ(back.tracks.size(), 1u);
  EXPECT_EQ(back.next_id, 17);
  EXPECT_EQ(back.sensor_id, SensorId::Radar);
  const Track& b = back.tracks[0];
  EXPECT_EQ(b.id, 16);
  EXPECT_EQ(b.state.mean, tr.state.mean);
  EXPECT_EQ(b.state.cov, tr.state.cov);
  EXPECT_EQ(b.age, 5);
  EXPECT_EQ(b.updated_at, 2.46);
  EXPECT_EQ(b.last_sensor, SensorId::Lidar);
  EXPECT_EQ(b.misses, 1);
}

TEST(LogIo, SchemaFieldNames) {
  const std::string frame = serialize_record(SensorFrame{0.5, SensorId::Lidar, {{1, 2, 3, 4}}});
  EXPECT_EQ(frame, R"({"type":"sensor_frame","t":0.5,"sensor":"lidar","detections":[{"x":1.0,"y":2.0,"vx":3.0,"vy":4.0}]})");
  EXPECT_EQ(serialize_record(EgoMotion{1.0, 25.0, 0.1}), R"({"type":"ego_motion","t":1.0,"v":25.0,"omega":0.1})");
  const std::string rtk = serialize_record(RtkFix{0.0, Vehicle::Target, 1, 2, 3, 4, std::nullopt});
  EXPECT_EQ(rtk.find("heading"), std::string::npos);
  EXPECT_NE(rtk.find(R"("vehicle":"target")"), std::string::npos);
  const auto ego = std::get<RtkFix>(parse_record(serialize_record(RtkFix{0.0, Vehicle::Ego, 1, 2, 3, 4, 0.25})));
  EXPECT_EQ(ego.heading, 0.25);
}

TEST(LogIo, MalformedLinesRejected) {
  EXPECT_THROW(parse_record("{not json"), ParseError);
  EXPECT_THROW(parse_record("[1,2,3]"), ParseError);
  EXPECT_THROW(parse_record(R"({"t":0})"), ParseError);
  EXPECT_THROW(parse_record(R"({"type":"weather","t":0})"), ParseError);
  EXPECT_THROW(parse_record(R"({"type":"ego_motion","v":1,"omega":0})"), ParseError);
  EXPECT_THROW(parse_record(R"({"type":"ego_motion","t":null,"v":1,"omega":0})"), ParseError);
  EXPECT_THROW(parse_record(R"({"type":"ego_motion","t":1e999,"v":1,"omega":0})"), ParseError);
  EXPECT_THROW(parse_record(R"({"type":"ego_motion","t":"0","v":1,"omega":0})"), ParseError);
  EXPECT_THROW(parse_record(R"({"type":"sensor_frame","t":0,"sensor":"sonar","detections":[]})"), ParseError);
  EXPECT_THROW(parse_record(R"({"type":"sensor_frame","t":0,"sensor":"radar","detections":[{"x":1}]})"), ParseError);
  EXPECT_THROW(parse_record(R"({"type":"rtk_fix","t":0,"vehicle":"bus","px":0,"py":0,"vx":0,"vy":0})"), ParseError);
  EXPECT_THROW(parse_record(R"({"type":"fused_list","t":0,"sensor":"radar","tracks":[{"id":0,"x":0,"y":0,"vx":0,"vy":0,"cov":[1,2],"age":1,"created_at":0,"updated_at":0,"last_sensor":"radar"}]})"), ParseError);
}

TEST(LogIo, NonFiniteDetectionDoesNotParse) {
  const std::string line = serialize_record(SensorFrame{0.0, SensorId::Lidar, {{std::numeric_limits<double>::quiet_NaN(), 0, 0, 0}}});
  EXPECT_THROW(parse_record(line), ParseError);
}

TEST(LogIo, FileErrorsCarryLineNumbers) {
  const fs::path dir = fs::temp_directory_path() / "fusetrack_log_io";
  fs::create_directories(dir);
  const fs::path p = dir / "bad.jsonl";
  {
    std::ofstream out(p);
    out << serialize_record(EgoMotion{0.0, 1.0, 0.0}) << "\n\n   \n" << R"({"type":"ego_motion","t":1})" << "\n";
  }
  try {
    read_log(p);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:4"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_log(dir / "missing.jsonl"), ParseError);
  fs::remove_all(dir);
}

TEST(LogIo, TypedReadersFilterAndWriteBundle) {
  const fs::path dir = fs::temp_directory_path() / "fusetrack_bundle_io";
  fs::remove_all(dir);
  const LogBundle b = simulate(ScenarioConfig::highway(2.0, 5));
  write_bundle(dir, b);
  EXPECT_EQ(read_records<SensorFrame>(dir / "sensor.jsonl").size(), b.frames.size());
  EXPECT_EQ(read_records<RtkFix>(dir / "rtk.jsonl").size(), b.rtk.size());
  EXPECT_TRUE(read_records<RtkFix>(dir / "sensor.jsonl").empty());
  const auto truth = read_records<RelativeState>(dir / "truth.jsonl");
  ASSERT_EQ(truth.size(), b.truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) EXPECT_EQ(truth[i], b.truth[i]);
  const auto ego = read_records<EgoMotion>(dir / "ego.jsonl");
  ASSERT_EQ(ego.size(), b.ego.size());
  EXPECT_EQ(ego.back().v, b.ego.back().v);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace fusetrack
