#include "momentsdp/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>

#include "momentsdp/error.hpp"

namespace momentsdp::log {

namespace {

Level from_env() {
  const char* env = std::getenv("MOMENTSDP_LOG");
  if (env == nullptr || *env == '\0') return Level::warn;
  try {
    return parse_level(env);
  } catch (const InputError&) {
    std::fprintf(stderr, "[warn] ignoring MOMENTSDP_LOG=%s\n", env);
    return Level::warn;
  }
}

std::atomic<int>& current() {
  static std::atomic<int> value{static_cast<int>(from_env())};
  return value;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level level() { return static_cast<Level>(current().load(std::memory_order_relaxed)); }

void set_level(Level level) { current().store(static_cast<int>(level), std::memory_order_relaxed); }

Level parse_level(std::string_view text) {
  if (text == "off" || text == "0") return Level::off;
  if (text == "error" || text == "1") return Level::error;
  if (text == "warn" || text == "2") return Level::warn;
  if (text == "info" || text == "3") return Level::info;
  if (text == "debug" || text == "4") return Level::debug;
  throw InputError(fmt::format("unknown log level '{}'", text));
}

void write(Level level, std::string_view message) {
  static constexpr const char* kNames[] = {"off", "error", "warn", "info", "debug"};
  std::lock_guard lock(sink_mutex());
  fmt::print(stderr, "[{}] {}\n", kNames[static_cast<int>(level)], message);
}

}  // namespace momentsdp::log
