#pragma once

#include <cstdlib>
#include <iostream>
#include <string_view>

namespace gcho::log {

enum class Level { Off = 0, Info = 1, Debug = 2 };

/// Read once from GCHO_LOG (off | info | debug); unset means off.
inline Level level() {
  static const Level lvl = [] {
    const char* env = std::getenv("GCHO_LOG");
    if (!env) return Level::Off;
    const std::string_view v(env);
    if (v == "debug") return Level::Debug;
    if (v == "info") return Level::Info;
    return Level::Off;
  }();
  return lvl;
}

template <typename... Args>
void write(Level at, const Args&... args) {
  if (static_cast<int>(level()) < static_cast<int>(at)) return;
  std::cerr << (at == Level::Debug ? "[gcho debug] " : "[gcho] ");
  (std::cerr << ... << args) << '\n';
}

template <typename... Args>
void info(const Args&... args) { write(Level::Info, args...); }

template <typename... Args>
void debug(const Args&... args) { write(Level::Debug, args...); }

}  // namespace gcho::log
