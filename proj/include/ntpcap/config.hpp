#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ntpcap {

/// Flat "key = value" file. Blank lines and lines starting with '#' are
/// skipped; keys may be written with or without a leading "--".
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values_file(const std::string& path);

}  // namespace ntpcap
