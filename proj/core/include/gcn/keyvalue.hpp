#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gcn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "key = value" lines; '#' starts a comment; blank lines ignored. Keys are unique.
// Throws ConfigError naming the offending line.
std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view source = "<text>");
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

}  // namespace gcn
