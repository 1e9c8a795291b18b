#include "mrboost/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <locale>
#include <sstream>

namespace mrb {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.find('=') == std::string::npos) {
      throw ConfigError("line " + std::to_string(number), "expected key=value");
    }
    config.set(line);
  }
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse(in);
}

void ExperimentConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment, "expected key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw ConfigError("config", "empty key");
  values_[key] = value;
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) {
  const auto it = values_.find(key);
  const std::string value = it == values_.end() ? fallback : it->second;
  resolved_[key] = value;
  return value;
}

std::string ExperimentConfig::require_string(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) throw ConfigError(key, "required");
  resolved_[key] = it->second;
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) {
  return get_double_in(key, fallback, -std::numeric_limits<double>::max(),
                       std::numeric_limits<double>::max());
}

double ExperimentConfig::get_double_in(const std::string& key, double fallback, double lo,
                                       double hi) {
  double value = fallback;
  if (const auto it = values_.find(key); it != values_.end()) {
    const std::string& text = it->second;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
      throw ConfigError(key, "expected a number, got '" + text + "'");
    }
  }
  if (!std::isfinite(value) || value < lo || value > hi) {
    throw ConfigError(key, "must lie in [" + format_double(lo) + ", " + format_double(hi) +
                               "], got " + format_double(value));
  }
  resolved_[key] = format_double(value);
  return value;
}

std::int64_t ExperimentConfig::get_int(const std::string& key, std::int64_t fallback,
                                       std::int64_t lo, std::int64_t hi) {
  std::int64_t value = fallback;
  if (const auto it = values_.find(key); it != values_.end()) {
    const std::string& text = it->second;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
      throw ConfigError(key, "expected an integer, got '" + text + "'");
    }
  }
  if (value < lo || value > hi) {
    throw ConfigError(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                               "], got " + std::to_string(value));
  }
  resolved_[key] = std::to_string(value);
  return value;
}

std::uint64_t ExperimentConfig::get_seed(const std::string& key, std::uint64_t fallback) {
  std::uint64_t value = fallback;
  if (const auto it = values_.find(key); it != values_.end()) {
    const std::string& text = it->second;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
      throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
    }
  }
  resolved_[key] = std::to_string(value);
  return value;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) {
  bool value = fallback;
  if (const auto it = values_.find(key); it != values_.end()) {
    const std::string& t = it->second;
    if (t == "1" || t == "true" || t == "yes" || t == "on") {
      value = true;
    } else if (t == "0" || t == "false" || t == "no" || t == "off") {
      value = false;
    } else {
      throw ConfigError(key, "expected true or false, got '" + t + "'");
    }
  }
  resolved_[key] = value ? "true" : "false";
  return value;
}

std::vector<std::size_t> ExperimentConfig::get_sizes(const std::string& key,
                                                     const std::vector<std::size_t>& fallback) {
  std::vector<std::size_t> sizes = fallback;
  if (const auto it = values_.find(key); it != values_.end()) {
    sizes.clear();
    std::istringstream in(it->second);
    std::string cell;
    while (std::getline(in, cell, ',')) {
      cell = trim(cell);
      std::size_t v = 0;
      const char* end = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (ec != std::errc() || ptr != end || cell.empty() || v == 0) {
        throw ConfigError(key, "expected comma-separated positive sizes");
      }
      sizes.push_back(v);
    }
  }
  std::string text;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    text += (i ? "," : "") + std::to_string(sizes[i]);
  }
  resolved_[key] = text;
  return sizes;
}

void ExperimentConfig::reject_unused() const {
  for (const auto& [key, value] : values_) {
    if (!resolved_.contains(key)) throw ConfigError(key, "unknown key");
  }
}

}  // namespace mrb
