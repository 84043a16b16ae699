#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace memlab {

// Fixed 17-significant-digit decimal formatting; round-trips IEEE doubles.
std::string format_g17(double value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Flat INI-style configuration: ordered sections of key = value lines.
// '#' and ';' start comments.
struct ConfigSection {
  std::string name;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_seed_or(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_list(const std::string& key) const;
};

std::vector<ConfigSection> parse_config(const std::string& text);

// FNV-1a over the raw bytes, hex-encoded.
std::string content_hash(const std::string& bytes);

}  // namespace memlab
