#include "polarsep/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace polarsep {
namespace {

LogLevel parse_level() {
  const char* env = std::getenv("POLARSEP_LOG");
  if (env == nullptr) return LogLevel::kWarn;
  if (std::strcmp(env, "quiet") == 0) return LogLevel::kQuiet;
  if (std::strcmp(env, "error") == 0) return LogLevel::kError;
  if (std::strcmp(env, "warn") == 0) return LogLevel::kWarn;
  if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
  if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
  return LogLevel::kWarn;
}

void vlog(LogLevel level, const char* tag, const char* fmt, va_list args) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::fprintf(stderr, "polarsep %s: ", tag);
  std::vfprintf(stderr, fmt, args);
  std::fputc('\n', stderr);
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

#define POLARSEP_LOG_IMPL(fn, level, tag)         \
  void fn(const char* fmt, ...) {                 \
    va_list args;                                 \
    va_start(args, fmt);                          \
    vlog(level, tag, fmt, args);                  \
    va_end(args);                                 \
  }

POLARSEP_LOG_IMPL(log_error, LogLevel::kError, "error")
POLARSEP_LOG_IMPL(log_warn, LogLevel::kWarn, "warn")
POLARSEP_LOG_IMPL(log_info, LogLevel::kInfo, "info")
POLARSEP_LOG_IMPL(log_debug, LogLevel::kDebug, "debug")

#undef POLARSEP_LOG_IMPL

}  // namespace polarsep
