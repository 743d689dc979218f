#include "thermolen/errors.hpp"

#include <iostream>
#include <mutex>

namespace thermolen {
namespace {

std::mutex& sink_mutex() {
  static std::mutex mutex;
  return mutex;
}

WarningSink& sink() {
  static WarningSink current = [](std::string_view message) {
    std::cerr << "thermolen warning: " << message << '\n';
  };
  return current;
}

}  // namespace

void set_warning_sink(WarningSink new_sink) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(new_sink);
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

}  // namespace thermolen
