#pragma once

#include <functional>
#include <string_view>

namespace labelsift {

enum class log_level { debug, info, warning };

using log_sink = std::function<void(log_level, std::string_view)>;

/// Replaces the process-wide sink (default: warnings to stderr). Returns the previous sink.
log_sink set_log_sink(log_sink sink);
/// Minimum level forwarded to the sink.
void set_log_level(log_level level);

void log(log_level level, std::string_view message);
inline void log_warning(std::string_view message) { log(log_level::warning, message); }
inline void log_info(std::string_view message) { log(log_level::info, message); }

}  // namespace labelsift
