#include "memlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "memlab/errors.hpp"

namespace memlab {

std::string format_g17(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

std::string ConfigSection::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end())
    throw ConfigError("section [" + name + "]: missing field '" + key + "'");
  return it->second;
}

std::string ConfigSection::get_or(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double ConfigSection::get_double(const std::string& key) const {
  std::string raw = get(key);
  try {
    std::size_t consumed = 0;
    double value = std::stod(raw, &consumed);
    if (consumed != raw.size()) throw std::invalid_argument(raw);
    return value;
  } catch (const std::invalid_argument&) {
    throw ConfigError("section [" + name + "]: field '" + key + "' is not a number");
  }
}

double ConfigSection::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t ConfigSection::get_int(const std::string& key) const {
  std::string raw = get(key);
  try {
    std::size_t consumed = 0;
    std::int64_t value = std::stoll(raw, &consumed);
    if (consumed != raw.size()) throw std::invalid_argument(raw);
    return value;
  } catch (const std::invalid_argument&) {
    throw ConfigError("section [" + name + "]: field '" + key + "' is not an integer");
  }
}

std::int64_t ConfigSection::get_int_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t ConfigSection::get_seed_or(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stoull(get(key));
  } catch (const std::invalid_argument&) {
    throw ConfigError("section [" + name + "]: field '" + key + "' is not a seed");
  }
}

std::vector<double> ConfigSection::get_list(const std::string& key) const {
  std::vector<double> out;
  std::istringstream is(get(key));
  std::string cell;
  while (std::getline(is, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::invalid_argument&) {
      throw ConfigError("section [" + name + "]: field '" + key + "' has a non-numeric entry");
    }
  }
  if (out.empty()) throw ConfigError("section [" + name + "]: field '" + key + "' is empty");
  return out;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<ConfigSection> parse_config(const std::string& text) {
  std::vector<ConfigSection> sections;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      ConfigSection section;
      section.name = trim(line.substr(1, line.size() - 2));
      if (section.name.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
      sections.push_back(std::move(section));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    if (sections.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    sections.back().values[key] = value;
  }
  return sections;
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace memlab
