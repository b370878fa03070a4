#pragma once

#include <sstream>
#include <string>

namespace twoscale::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

void set_level(Level level);
Level level();
void write(Level level, const std::string& message);

template <typename... Args>
void info(const Args&... args) {
  if (level() > Level::Info) return;
  std::ostringstream s;
  (s << ... << args);
  write(Level::Info, s.str());
}

template <typename... Args>
void warn(const Args&... args) {
  if (level() > Level::Warn) return;
  std::ostringstream s;
  (s << ... << args);
  write(Level::Warn, s.str());
}

template <typename... Args>
void debug(const Args&... args) {
  if (level() > Level::Debug) return;
  std::ostringstream s;
  (s << ... << args);
  write(Level::Debug, s.str());
}

}  // namespace twoscale::log
