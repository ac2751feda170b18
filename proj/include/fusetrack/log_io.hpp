#pragma once

#include "fusetrack/motion.hpp"
#include "fusetrack/simulator.hpp"
#include "fusetrack/tracker.hpp"
#include "fusetrack/truth_eval.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fusetrack {

/// One JSONL line. The "type" key selects the alternative:
/// sensor_frame | ego_motion | rtk_fix | fused_list | relative_state.
using LogRecord = std::variant<SensorFrame, EgoMotion, RtkFix, FusedList, RelativeState>;

/// Serializes to a single line without the trailing newline.
std::string serialize_record(const LogRecord& record);

/// Throws ParseError on malformed JSON, unknown type, missing fields or non-finite "t".
LogRecord parse_record(std::string_view line);

std::vector<LogRecord> read_log(const std::filesystem::path& path);
void write_log(const std::filesystem::path& path, const std::vector<LogRecord>& records);

/// Records of one alternative, in file order; other record types are skipped.
template <typename T>
std::vector<T> read_records(const std::filesystem::path& path) {
  std::vector<T> out;
  for (LogRecord& rec : read_log(path)) {
    if (auto* value = std::get_if<T>(&rec)) out.push_back(std::move(*value));
  }
  return out;
}

template <typename T>
void write_records(const std::filesystem::path& path, const std::vector<T>& values) {
  std::vector<LogRecord> records(values.begin(), values.end());
  write_log(path, records);
}

/// Writes sensor.jsonl, ego.jsonl, rtk.jsonl and truth.jsonl into `dir` (created if needed).
void write_bundle(const std::filesystem::path& dir, const LogBundle& bundle);

}  // namespace fusetrack
