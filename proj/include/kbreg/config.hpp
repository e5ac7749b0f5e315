#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kbreg/errors.hpp"

namespace kbreg {

// Flat "key = value" configuration, UTF-8, '#' line comments. The digest of
// the raw bytes is embedded in every output for provenance.
struct Config {
  std::map<std::string, std::string> entries;
  std::string digest;

  static Config load(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  double num(const std::string& key) const;
  double num_or(const std::string& key, double fallback) const;
  long integer_or(const std::string& key, long fallback) const;
  std::uint64_t uint_or(const std::string& key, std::uint64_t fallback) const;
  std::vector<std::string> list(const std::string& key) const;  // comma separated

  // all entries under "prefix." with the prefix stripped
  std::map<std::string, std::string> section(const std::string& prefix) const;
};

std::string fnv1a_hex(const std::string& bytes);

}  // namespace kbreg
