#include "kslab/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "kslab/errors.hpp"
#include "kslab/io.hpp"

namespace kslab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    const auto [it, inserted] = cfg.entries_.insert({key, Entry{value, lineno, false}});
    if (!inserted)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                        "' (first set on line " + std::to_string(it->second.line) + ")");
  }
  return cfg;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  double v = fallback;
  if (it != entries_.end()) {
    it->second.consumed = true;
    const std::string& s = it->second.value;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
      throw ConfigError(origin_ + ":" + std::to_string(it->second.line) + ": key '" + key +
                        "' is not a number: '" + s + "'");
  }
  resolved_[key] = format_double(v);
  return v;
}

std::size_t RunConfig::get_size(const std::string& key, std::size_t fallback) const {
  const auto it = entries_.find(key);
  std::size_t v = fallback;
  if (it != entries_.end()) {
    it->second.consumed = true;
    const std::string& s = it->second.value;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
      throw ConfigError(origin_ + ":" + std::to_string(it->second.line) + ": key '" + key +
                        "' is not a non-negative integer: '" + s + "'");
  }
  resolved_[key] = std::to_string(v);
  return v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  bool v = fallback;
  if (it != entries_.end()) {
    it->second.consumed = true;
    const std::string& s = it->second.value;
    if (s == "true" || s == "1")
      v = true;
    else if (s == "false" || s == "0")
      v = false;
    else
      throw ConfigError(origin_ + ":" + std::to_string(it->second.line) + ": key '" + key +
                        "' is not a boolean (true/false/1/0): '" + s + "'");
  }
  resolved_[key] = v ? "true" : "false";
  return v;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  std::string v = fallback;
  if (it != entries_.end()) {
    it->second.consumed = true;
    v = it->second.value;
  }
  resolved_[key] = v;
  return v;
}

bool RunConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

void RunConfig::reject_unknown() const {
  std::string unknown;
  for (const auto& [key, entry] : entries_) {
    if (entry.consumed) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += "'" + key + "' (line " + std::to_string(entry.line) + ")";
  }
  if (!unknown.empty())
    throw ConfigError(origin_ + ": unknown config keys: " + unknown);
}

}  // namespace kslab
