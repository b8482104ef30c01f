#include "hadithscope/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <string>

namespace hadithscope::log {
namespace {

std::atomic<Format> g_format{Format::text};
std::atomic<bool> g_quiet{false};
std::mutex g_mutex;

void emit(std::string_view level, std::string_view event, const nlohmann::ordered_json& fields) {
  if (g_quiet && level == "info") return;
  std::string line;
  if (g_format == Format::json) {
    nlohmann::ordered_json j;
    j["level"] = level;
    j["event"] = event;
    if (fields.is_object()) {
      for (const auto& [key, value] : fields.items()) j[key] = value;
    }
    line = j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  } else {
    line = "[" + std::string(level) + "] " + std::string(event);
    if (fields.is_object()) {
      for (const auto& [key, value] : fields.items()) {
        line += " " + key + "=" +
                (value.is_string() ? value.get<std::string>()
                                   : value.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
      }
    }
  }
  std::lock_guard lock(g_mutex);
  std::cerr << line << '\n';
}

}  // namespace

void set_format(Format format) { g_format = format; }
void set_quiet(bool quiet) { g_quiet = quiet; }

void info(std::string_view event, const nlohmann::ordered_json& fields) { emit("info", event, fields); }
void warn(std::string_view event, const nlohmann::ordered_json& fields) { emit("warn", event, fields); }
void error(std::string_view event, const nlohmann::ordered_json& fields) { emit("error", event, fields); }

}  // namespace hadithscope::log
