#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace rta {

enum class LogLevel : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("RTA_LOG_LEVEL");
    if (!env) return LogLevel::Warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::Error;
    if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  const char* tag = lvl == LogLevel::Error  ? "error"
                    : lvl == LogLevel::Warn ? "warn"
                    : lvl == LogLevel::Info ? "info"
                                            : "debug";
  std::fprintf(stderr, "[rta:%s] %s\n", tag, msg.c_str());
}

inline void log_error(const std::string& msg) { log_msg(LogLevel::Error, msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::Warn, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::Debug, msg); }

}  // namespace rta
