#include "glandseg/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace glandseg {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& sink() {
  static LogSink s = [](LogLevel level, std::string_view msg) {
    std::cerr << (level == LogLevel::Warning ? "warning: " : "") << msg << '\n';
  };
  return s;
}

void emit(LogLevel level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(level, message);
}

}  // namespace

LogSink set_log_sink(LogSink s) {
  std::lock_guard lock(sink_mutex());
  return std::exchange(sink(), std::move(s));
}

void log_info(std::string_view message) { emit(LogLevel::Info, message); }
void log_warning(std::string_view message) { emit(LogLevel::Warning, message); }

}  // namespace glandseg
