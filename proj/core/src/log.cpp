#include "exhawkes/core/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace exhawkes::log {
namespace {

bool g_verbose = false;
std::mutex g_mutex;

void default_sink(Level level, std::string_view message) {
  if (level == Level::debug || (level == Level::info && !g_verbose)) return;
  static constexpr const char* names[] = {"debug", "info", "warning", "error"};
  std::cerr << names[static_cast<int>(level)] << ": " << message << '\n';
}

Sink& current() {
  static Sink sink = default_sink;
  return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  Sink previous = current();
  current() = sink ? std::move(sink) : Sink(default_sink);
  return previous;
}

void set_verbose(bool on) { g_verbose = on; }

void write(Level level, std::string_view message) {
  std::lock_guard lock(g_mutex);
  current()(level, message);
}

}  // namespace exhawkes::log
