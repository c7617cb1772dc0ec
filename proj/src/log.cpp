#include "xpra/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace xpra {

namespace {
std::atomic<LogLevel> g_level{LogLevel::warning};
std::mutex g_mutex;

void emit(const char *tag, std::string_view message) {
  std::lock_guard lock(g_mutex);
  std::clog << "[xpra " << tag << "] " << message << '\n';
}
} // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_warning(std::string_view message) {
  if (g_level >= LogLevel::warning)
    emit("warn", message);
}

void log_info(std::string_view message) {
  if (g_level >= LogLevel::info)
    emit("info", message);
}

} // namespace xpra
