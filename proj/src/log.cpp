#include "posegeom/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace posegeom {

namespace {

LogLevel threshold_from_env() {
  const char* v = std::getenv("POSEGEOM_LOG");
  if (!v) return LogLevel::kInfo;
  const std::string s(v);
  if (s == "debug") return LogLevel::kDebug;
  if (s == "info") return LogLevel::kInfo;
  if (s == "warn") return LogLevel::kWarn;
  if (s == "error") return LogLevel::kError;
  return LogLevel::kInfo;
}

const char* tag(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug: return "debug";
    case LogLevel::kInfo: return "info";
    case LogLevel::kWarn: return "warn";
    case LogLevel::kError: return "error";
  }
  return "info";
}

std::mutex g_mutex;

}  // namespace

void log(LogLevel level, const std::string& msg) {
  static const LogLevel threshold = threshold_from_env();
  if (level < threshold) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "[posegeom:%s] %s\n", tag(level), msg.c_str());
}

}  // namespace posegeom
