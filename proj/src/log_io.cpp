#include "fusetrack/log_io.hpp"

#include "fusetrack/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace fusetrack {

namespace {

using Json = nlohmann::ordered_json;

std::optional<Vehicle> parse_vehicle(std::string_view name) {
  if (name == "ego") return Vehicle::Ego;
  if (name == "target") return Vehicle::Target;
  return std::nullopt;
}

std::string_view vehicle_name(Vehicle v) { return v == Vehicle::Ego ? "ego" : "target"; }

double number(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ParseError(std::string("missing or non-numeric field \"") + key + "\"");
  }
  return it->get<double>();
}

double timestamp(const Json& j) {
  const double t = number(j, "t");
  if (!std::isfinite(t)) throw ParseError("field \"t\" must be finite");
  return t;
}

SensorId sensor(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw ParseError(std::string("missing field \"") + key + "\"");
  const auto id = parse_sensor_id(it->get<std::string>());
  if (!id) throw ParseError("unknown sensor \"" + it->get<std::string>() + "\"");
  return *id;
}

const Json& array_field(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_array()) throw ParseError(std::string("missing array \"") + key + "\"");
  return *it;
}

Json to_json(const SensorFrame& f) {
  Json j;
  j["type"] = "sensor_frame";
  j["t"] = f.t;
  j["sensor"] = to_string(f.sensor_id);
  Json dets = Json::array();
  for (const Detection& d : f.detections) {
    dets.push_back(Json{{"x", d.x}, {"y", d.y}, {"vx", d.vx}, {"vy", d.vy}});
  }
  j["detections"] = std::move(dets);
  return j;
}

Json to_json(const EgoMotion& e) {
  return Json{{"type", "ego_motion"}, {"t", e.t}, {"v", e.v}, {"omega", e.omega}};
}

Json to_json(const RtkFix& f) {
  Json j{{"type", "rtk_fix"}, {"t", f.t},   {"vehicle", vehicle_name(f.vehicle)},
         {"px", f.px},        {"py", f.py}, {"vx", f.vx},
         {"vy", f.vy}};
  if (f.heading) j["heading"] = *f.heading;
  return j;
}

Json to_json(const FusedList& l) {
  Json j;
  j["type"] = "fused_list";
  j["t"] = l.t;
  j["sensor"] = to_string(l.sensor_id);
  j["next_id"] = l.next_id;
  Json tracks = Json::array();
  for (const Track& tr : l.tracks) {
    Json cov = Json::array();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) cov.push_back(tr.state.cov(r, c));
    tracks.push_back(Json{{"id", tr.id},
                          {"x", tr.state.mean(0)},
                          {"y", tr.state.mean(1)},
                          {"vx", tr.state.mean(2)},
                          {"vy", tr.state.mean(3)},
                          {"cov", std::move(cov)},
                          {"age", tr.age},
                          {"created_at", tr.created_at},
                          {"updated_at", tr.updated_at},
                          {"last_sensor", to_string(tr.last_sensor)},
                          {"misses", tr.misses}});
  }
  j["tracks"] = std::move(tracks);
  return j;
}

Json to_json(const RelativeState& s) {
  return Json{{"type", "relative_state"}, {"t", s.t},   {"x", s.x},
              {"y", s.y},                 {"vx", s.vx}, {"vy", s.vy}};
}

SensorFrame frame_from_json(const Json& j) {
  SensorFrame f;
  f.t = timestamp(j);
  f.sensor_id = sensor(j, "sensor");
  for (const Json& d : array_field(j, "detections")) {
    f.detections.push_back({number(d, "x"), number(d, "y"), number(d, "vx"), number(d, "vy")});
  }
  return f;
}

RtkFix rtk_from_json(const Json& j) {
  RtkFix f;
  f.t = timestamp(j);
  const auto it = j.find("vehicle");
  if (it == j.end() || !it->is_string()) throw ParseError("missing field \"vehicle\"");
  const auto vehicle = parse_vehicle(it->get<std::string>());
  if (!vehicle) throw ParseError("unknown vehicle \"" + it->get<std::string>() + "\"");
  f.vehicle = *vehicle;
  f.px = number(j, "px");
  f.py = number(j, "py");
  f.vx = number(j, "vx");
  f.vy = number(j, "vy");
  if (j.contains("heading") && !j["heading"].is_null()) f.heading = number(j, "heading");
  return f;
}

FusedList fused_from_json(const Json& j) {
  FusedList l;
  l.t = timestamp(j);
  l.sensor_id = sensor(j, "sensor");
  l.next_id = static_cast<std::int64_t>(number(j, "next_id"));
  for (const Json& tj : array_field(j, "tracks")) {
    Track tr;
    tr.id = tj.at("id").get<std::int64_t>();
    tr.state.mean = Vec4(number(tj, "x"), number(tj, "y"), number(tj, "vx"), number(tj, "vy"));
    const Json& cov = array_field(tj, "cov");
    if (cov.size() != 16) throw ParseError("track \"cov\" must hold 16 numbers");
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) tr.state.cov(r, c) = cov.at(static_cast<std::size_t>(r * 4 + c)).get<double>();
    tr.age = tj.at("age").get<int>();
    tr.created_at = number(tj, "created_at");
    tr.updated_at = number(tj, "updated_at");
    tr.last_sensor = sensor(tj, "last_sensor");
    tr.misses = tj.value("misses", 0);
    l.tracks.push_back(std::move(tr));
  }
  return l;
}

}  // namespace

std::optional<SensorId> parse_sensor_id(std::string_view name) {
  if (name == "lidar") return SensorId::Lidar;
  if (name == "radar") return SensorId::Radar;
  return std::nullopt;
}

std::string serialize_record(const LogRecord& record) {
  return std::visit([](const auto& value) { return to_json(value).dump(); }, record);
}

LogRecord parse_record(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("record must be a JSON object");
  const auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) throw ParseError("missing field \"type\"");
  const std::string type = type_it->get<std::string>();
  try {
    if (type == "sensor_frame") return frame_from_json(j);
    if (type == "ego_motion") return EgoMotion{timestamp(j), number(j, "v"), number(j, "omega")};
    if (type == "rtk_fix") return rtk_from_json(j);
    if (type == "fused_list") return fused_from_json(j);
    if (type == "relative_state") {
      return RelativeState{timestamp(j), number(j, "x"), number(j, "y"), number(j, "vx"),
                           number(j, "vy")};
    }
  } catch (const Json::exception& e) {
    throw ParseError(type + ": " + e.what());
  }
  throw ParseError("unknown record type \"" + type + "\"");
}

std::vector<LogRecord> read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<LogRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_log(const std::filesystem::path& path, const std::vector<LogRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path.string());
  for (const LogRecord& rec : records) out << serialize_record(rec) << '\n';
  if (!out) throw ParseError("write failed for " + path.string());
}

void write_bundle(const std::filesystem::path& dir, const LogBundle& bundle) {
  std::filesystem::create_directories(dir);
  write_records(dir / "sensor.jsonl", bundle.frames);
  write_records(dir / "ego.jsonl", bundle.ego);
  write_records(dir / "rtk.jsonl", bundle.rtk);
  write_records(dir / "truth.jsonl", bundle.truth);
}

}  // namespace fusetrack
