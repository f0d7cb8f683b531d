#pragma once

#include <functional>
#include <string_view>

namespace exhawkes::log {

enum class Level { debug, info, warn, error };

using Sink = std::function<void(Level, std::string_view)>;

// Returns the previous sink. A null sink restores the default stderr sink.
Sink set_sink(Sink sink);
void set_verbose(bool on);

void write(Level level, std::string_view message);
inline void debug(std::string_view m) { write(Level::debug, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }
inline void error(std::string_view m) { write(Level::error, m); }

}  // namespace exhawkes::log
