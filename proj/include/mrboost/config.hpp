#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrb {

/// Raised for a missing, malformed or out-of-range configuration value.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Flat key=value configuration. '#' starts a comment; later assignments win.
/// Getters record the resolved value of every key they read, defaults
/// included, so the run can be echoed in full.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig load(const std::string& path);

  /// Applies a "key=value" override.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.contains(key); }

  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  /// Finite value in [lo, hi].
  double get_double_in(const std::string& key, double fallback, double lo, double hi);
  std::int64_t get_int(const std::string& key, std::int64_t fallback, std::int64_t lo,
                       std::int64_t hi);
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  /// Comma-separated sizes, e.g. "64,64".
  std::vector<std::size_t> get_sizes(const std::string& key,
                                     const std::vector<std::size_t>& fallback);

  /// Every key read so far with its resolved text value.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }
  /// Throws ConfigError naming the first key that was set but never read.
  void reject_unused() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> resolved_;
};

}  // namespace mrb
