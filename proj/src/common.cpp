#include "seqrank/common.hpp"

#include <cstdlib>
#include <mutex>

namespace seqrank {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SEQRANK_LOG");
    if (!env) return LogLevel::kInfo;
    const std::string v(env);
    if (v == "quiet" || v == "0") return LogLevel::kQuiet;
    if (v == "debug" || v == "2") return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

namespace {
std::mutex log_mutex;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::fprintf(stderr, "[seqrank] %s\n", msg.c_str());
  }
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::kDebug) {
    std::lock_guard<std::mutex> lock(log_mutex);
    std::fprintf(stderr, "[seqrank:debug] %s\n", msg.c_str());
  }
}

}  // namespace seqrank
