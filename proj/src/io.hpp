#pragma once

// Internal helpers shared by the text file formats.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "socnav/env.hpp"

namespace socnav::io {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

struct Token {
  std::string_view text;
  std::size_t offset;  // absolute byte offset in the parsed buffer
};

std::vector<Token> split_tokens(std::string_view line, std::size_t line_offset);

nlohmann::json env_to_json(const EnvConfig& env);
// Missing keys keep their defaults; unknown keys throw ConfigError.
EnvConfig env_from_json(const nlohmann::json& j, EnvConfig base = {});

// Throws ConfigError naming the first key of `j` not in `allowed`.
void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, std::string_view where);

}  // namespace socnav::io
