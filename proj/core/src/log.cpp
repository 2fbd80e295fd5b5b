#include "jexplore/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <string>

#include "jexplore/errors.hpp"

namespace jexplore {

namespace {

std::atomic<LogLevel> g_level{LogLevel::Info};
std::mutex g_write_mutex;

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::Debug: return "debug";
        case LogLevel::Info: return "info";
        case LogLevel::Warn: return "warn";
        case LogLevel::Error: return "error";
    }
    return "?";
}

}  // namespace

void set_log_level(LogLevel level) noexcept {
    g_level.store(level, std::memory_order_relaxed);
}

LogLevel log_level() noexcept {
    return g_level.load(std::memory_order_relaxed);
}

LogLevel log_level_from_string(std::string_view name) {
    if (name == "debug") return LogLevel::Debug;
    if (name == "info") return LogLevel::Info;
    if (name == "warn") return LogLevel::Warn;
    if (name == "error") return LogLevel::Error;
    throw ArgumentError("unknown log level: " + std::string(name));
}

void log_message(LogLevel level, std::string_view message) {
    if (level < log_level()) {
        return;
    }
    const std::lock_guard<std::mutex> lock(g_write_mutex);
    std::fprintf(stderr, "[%s] %.*s\n", level_name(level), static_cast<int>(message.size()),
                 message.data());
}

}  // namespace jexplore
