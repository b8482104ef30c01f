#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

namespace hadithscope::log {

enum class Format { text, json };

/// Process-wide; messages go to stderr.
void set_format(Format format);
void set_quiet(bool quiet);

void info(std::string_view event, const nlohmann::ordered_json& fields = {});
void warn(std::string_view event, const nlohmann::ordered_json& fields = {});
void error(std::string_view event, const nlohmann::ordered_json& fields = {});

}  // namespace hadithscope::log
