#include "labelsift/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace labelsift {

namespace {

std::mutex &sink_mutex() {
    static std::mutex m;
    return m;
}

log_sink &current_sink() {
    static log_sink sink = [](log_level level, std::string_view message) {
        std::clog << (level == log_level::warning ? "warning: " : "") << message << '\n';
    };
    return sink;
}

std::atomic<log_level> min_level{log_level::warning};

}  // namespace

log_sink set_log_sink(log_sink sink) {
    const std::lock_guard lock(sink_mutex());
    return std::exchange(current_sink(), std::move(sink));
}

void set_log_level(log_level level) { min_level = level; }

void log(log_level level, std::string_view message) {
    if (level < min_level.load()) {
        return;
    }
    const std::lock_guard lock(sink_mutex());
    if (current_sink()) {
        current_sink()(level, message);
    }
}

}  // namespace labelsift
