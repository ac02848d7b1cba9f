#pragma once

#include <atomic>
#include <cstdio>
#include <mutex>
#include <string>

namespace barc {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

// Process-wide log threshold. Messages below it are dropped.
LogLevel log_threshold();
void set_log_threshold(LogLevel level);

// Serialized write to stderr: "[warn] grid: ...".
void log_message(LogLevel level, const std::string& component, const std::string& text);

// Counter-based suppression for hot paths: logs the first `burst`
// occurrences per site, then every `every`-th one with a running count.
class RateLimitedLog {
 public:
  RateLimitedLog(std::string component, int burst = 5, long every = 100000)
      : component_(std::move(component)), burst_(burst), every_(every) {}

  void warn(const std::string& text) { emit(LogLevel::Warn, text); }
  void debug(const std::string& text) { emit(LogLevel::Debug, text); }
  long count() const { return count_.load(std::memory_order_relaxed); }

 private:
  void emit(LogLevel level, const std::string& text) {
    const long n = count_.fetch_add(1, std::memory_order_relaxed) + 1;
    if (n <= burst_ || n % every_ == 0) {
      log_message(level, component_, text + " (occurrence " + std::to_string(n) + ")");
    }
  }

  std::string component_;
  int burst_;
  long every_;
  std::atomic<long> count_{0};
};

}  // namespace barc
