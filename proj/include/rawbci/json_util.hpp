#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace rawbci {

using json = nlohmann::json;

/// Parses a JSON file; parse failures are reported with the 1-based line
/// number of the offending byte.
inline json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open JSON file: " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t stop = std::min(e.byte, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') ++line;
    }
    throw std::runtime_error(path + ": JSON parse error at line " +
                             std::to_string(line) + ": " + e.what());
  }
}

/// Rejects any key of `obj` not in `allowed`. Silent typos in config keys
/// are treated as hard errors everywhere.
inline void check_keys(const json& obj,
                       std::initializer_list<const char*> allowed,
                       const std::string& context) {
  if (!obj.is_object()) {
    throw std::runtime_error(context + ": expected a JSON object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::runtime_error(context + ": unknown key '" + item.key() + "'");
    }
  }
}

inline const json& require_key(const json& obj, const char* key,
                               const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw std::runtime_error(context + ": missing required key '" +
                             std::string(key) + "'");
  }
  return *it;
}

}  // namespace rawbci
