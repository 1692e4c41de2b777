#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <string_view>

namespace fehmm::log {

enum class Level { debug = 0, info = 1, warn = 2, quiet = 3 };

inline std::atomic<Level>& threshold() {
    static std::atomic<Level> level{Level::warn};
    return level;
}

inline void set_level(Level level) { threshold().store(level); }

inline void write(Level level, std::string_view message) {
    if (level < threshold().load()) return;
    static std::mutex mutex;
    static constexpr const char* tags[] = {"debug", "info", "warn"};
    std::lock_guard lock(mutex);
    std::clog << "[fehmm " << tags[static_cast<int>(level)] << "] " << message << '\n';
}

inline void debug(std::string_view m) { write(Level::debug, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }

}  // namespace fehmm::log
