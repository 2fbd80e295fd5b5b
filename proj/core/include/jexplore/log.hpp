#pragma once

#include <string_view>

namespace jexplore {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

void set_log_level(LogLevel level) noexcept;
LogLevel log_level() noexcept;
LogLevel log_level_from_string(std::string_view name);

/// Writes "[level] message" to standard error when `level` passes the filter.
void log_message(LogLevel level, std::string_view message);

inline void log_debug(std::string_view message) { log_message(LogLevel::Debug, message); }
inline void log_info(std::string_view message) { log_message(LogLevel::Info, message); }
inline void log_warn(std::string_view message) { log_message(LogLevel::Warn, message); }
inline void log_error(std::string_view message) { log_message(LogLevel::Error, message); }

}  // namespace jexplore
