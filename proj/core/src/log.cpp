#include "twoscale/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace twoscale::log {

namespace {
std::atomic<Level> g_level{Level::Warn};
std::mutex g_mutex;
constexpr const char* kNames[] = {"debug", "info", "warn", "error"};
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level level, const std::string& message) {
  if (level < g_level || level == Level::Off) return;
  std::lock_guard lock(g_mutex);
  std::clog << "[twoscale " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace twoscale::log
