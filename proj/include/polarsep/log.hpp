#pragma once

namespace polarsep {

enum class LogLevel { kQuiet = 0, kError = 1, kWarn = 2, kInfo = 3, kDebug = 4 };

// Parsed once from POLARSEP_LOG (quiet|error|warn|info|debug), default warn.
LogLevel log_level();

void log_error(const char* fmt, ...);
void log_warn(const char* fmt, ...);
void log_info(const char* fmt, ...);
void log_debug(const char* fmt, ...);

}  // namespace polarsep
