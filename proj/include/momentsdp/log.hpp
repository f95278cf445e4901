#pragma once

// Diagnostics on stderr. Verbosity comes from MOMENTSDP_LOG
// (off, error, warn, info, debug or 0-4); the default is warn.

#include <string_view>

#include <fmt/format.h>

namespace momentsdp::log {

enum class Level { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

Level level();
void set_level(Level level);
// Parses a level name or digit; throws InputError on anything else.
Level parse_level(std::string_view text);
void write(Level level, std::string_view message);

template <typename... Args>
void error(fmt::format_string<Args...> f, Args&&... args) {
  if (level() >= Level::error) write(Level::error, fmt::format(f, std::forward<Args>(args)...));
}
template <typename... Args>
void warn(fmt::format_string<Args...> f, Args&&... args) {
  if (level() >= Level::warn) write(Level::warn, fmt::format(f, std::forward<Args>(args)...));
}
template <typename... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
  if (level() >= Level::info) write(Level::info, fmt::format(f, std::forward<Args>(args)...));
}
template <typename... Args>
void debug(fmt::format_string<Args...> f, Args&&... args) {
  if (level() >= Level::debug) write(Level::debug, fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace momentsdp::log
