#include "aspectmine/log.h"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace aspectmine {
namespace {

LogLevel LevelFromEnv() {
  const char* env = std::getenv("ASPECTMINE_LOG");
  if (env == nullptr) return LogLevel::kWarn;
  std::string v(env);
  if (v == "error") return LogLevel::kError;
  if (v == "info") return LogLevel::kInfo;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

std::atomic<int>& Threshold() {
  static std::atomic<int> level{static_cast<int>(LevelFromEnv())};
  return level;
}

constexpr const char* kNames[] = {"error", "warn", "info", "debug"};

}  // namespace

LogLevel CurrentLogLevel() { return static_cast<LogLevel>(Threshold().load()); }

void SetLogLevel(LogLevel level) { Threshold().store(static_cast<int>(level)); }

void Log(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) > Threshold().load()) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[aspectmine " << kNames[static_cast<int>(level)] << "] " << message
            << '\n';
}

}  // namespace aspectmine
