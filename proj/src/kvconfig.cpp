#include "qgamp/kvconfig.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace qgamp {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

KvBlock KvBlock::parse(const std::string& text) {
  KvBlock block;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (block.has(key)) throw ConfigError("duplicate key: " + key);
    block.entries_.emplace_back(key, value);
  }
  return block;
}

bool KvBlock::has(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == key; });
}

const std::string& KvBlock::get(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.first == key) return e.second;
  throw ConfigError("missing key: " + key);
}

std::string KvBlock::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double KvBlock::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw ConfigError("");
    return d;
  } catch (...) {
    throw ConfigError("key `" + key + "`: not a number: " + v);
  }
}

std::int64_t KvBlock::get_int(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    const std::int64_t d = std::stoll(v, &pos);
    if (pos != v.size()) throw ConfigError("");
    return d;
  } catch (...) {
    throw ConfigError("key `" + key + "`: not an integer: " + v);
  }
}

std::uint64_t KvBlock::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    const std::uint64_t d = std::stoull(v, &pos);
    if (pos != v.size()) throw ConfigError("");
    return d;
  } catch (...) {
    throw ConfigError("key `" + key + "`: not an unsigned integer: " + v);
  }
}

std::vector<double> KvBlock::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_csv(get(key))) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw ConfigError("key `" + key + "`: bad list element: " + item);
    }
  }
  return out;
}

std::vector<int> KvBlock::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : split_csv(get(key))) {
    try {
      out.push_back(std::stoi(item));
    } catch (...) {
      throw ConfigError("key `" + key + "`: bad list element: " + item);
    }
  }
  return out;
}

std::vector<std::string> KvBlock::get_string_list(const std::string& key) const {
  return split_csv(get(key));
}

void KvBlock::require_known_keys(const std::vector<std::string>& allowed) const {
  for (const auto& e : entries_) {
    if (std::find(allowed.begin(), allowed.end(), e.first) == allowed.end())
      throw ConfigError("unknown key: " + e.first);
  }
}

void KvBlock::set(const std::string& key, const std::string& value) {
  for (auto& e : entries_) {
    if (e.first == key) {
      e.second = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

std::string KvBlock::to_text() const {
  std::string out;
  for (const auto& e : entries_) {
    out += e.first;
    out += " = ";
    out += e.second;
    out += '\n';
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_double_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace qgamp
