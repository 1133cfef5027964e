#include "ntpcap/config.hpp"

#include <fstream>
#include <sstream>

#include "ntpcap/error.hpp"

namespace ntpcap {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      fail(Errc::parse, "config line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.starts_with("--")) {
      key = key.substr(2);
    }
    if (key.empty()) {
      fail(Errc::parse, "config line " + std::to_string(lineno) + ": empty key");
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

KeyValues read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(Errc::io, "cannot open config '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

}  // namespace ntpcap
