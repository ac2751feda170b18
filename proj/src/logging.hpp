#pragma once

#include <spdlog/spdlog.h>

#include <utility>

namespace fusetrack::log {

/// stderr logger; verbosity comes from FUSETRACK_LOG (off|error|warn|info|debug|trace).
spdlog::logger& logger();

template <typename... Args>
void debug(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().debug(fmt, std::forward<Args>(args)...);
}

template <typename... Args>
void info(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().info(fmt, std::forward<Args>(args)...);
}

template <typename... Args>
void warn(fmt::format_string<Args...> fmt, Args&&... args) {
  logger().warn(fmt, std::forward<Args>(args)...);
}

}  // namespace fusetrack::log
