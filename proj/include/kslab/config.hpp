#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

namespace kslab {

// Plain-text run configuration: one `key = value` pair per line, `#` starts
// a comment, blank lines ignored. Keys are namespaced (model.a, solver.n,
// wave.c, ...). Lookups record both the keys consulted and the value used,
// so the fully resolved configuration (defaults included) can be echoed and
// re-ingested to reproduce a run.
class RunConfig {
 public:
  RunConfig() = default;

  // Parses a config file. Throws ConfigError naming file and line on
  // malformed lines or duplicate keys.
  static RunConfig load(const std::string& path);

  // Parses config text directly; `origin` labels error messages.
  static RunConfig parse(const std::string& text, const std::string& origin);

  // Typed lookups: return the stored value or `fallback` when the key is
  // absent. Every call marks the key consumed and records the resolved
  // value. Malformed values throw ConfigError naming key and line.
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  bool has(const std::string& key) const;

  // Throws ConfigError listing any keys present in the file that no lookup
  // ever consumed (catches typos like "solvre.n").
  void reject_unknown() const;

  // Every key consulted so far with the value that was actually used,
  // in sorted key order. Doubles are formatted to round-trip exactly.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
    mutable bool consumed = false;
  };
  std::string origin_ = "<none>";
  std::map<std::string, Entry> entries_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace kslab
