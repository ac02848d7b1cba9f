#include "barc/log.hpp"

namespace barc {

namespace {
std::atomic<LogLevel> g_threshold{LogLevel::Warn};
std::mutex g_mutex;

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

LogLevel log_threshold() { return g_threshold.load(std::memory_order_relaxed); }

void set_log_threshold(LogLevel level) { g_threshold.store(level, std::memory_order_relaxed); }

void log_message(LogLevel level, const std::string& component, const std::string& text) {
  if (level < log_threshold()) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "[%s] %s: %s\n", level_name(level), component.c_str(), text.c_str());
}

}  // namespace barc
