#ifndef ASPECTMINE_LOG_H_
#define ASPECTMINE_LOG_H_

#include <string_view>

namespace aspectmine {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Threshold read once from ASPECTMINE_LOG (error|warn|info|debug), default
// warn. Messages go to stderr.
LogLevel CurrentLogLevel();
void SetLogLevel(LogLevel level);
void Log(LogLevel level, std::string_view message);

}  // namespace aspectmine

#endif  // ASPECTMINE_LOG_H_
