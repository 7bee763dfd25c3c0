#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pbrnn {

/// Flat "key = value" text. '#' starts a comment; blank lines are skipped.
/// Every accessor marks its key as used so leftovers can be reported.
class KeyValues {
public:
  static KeyValues parse(const std::string &text);
  static KeyValues load(const std::filesystem::path &path);

  bool has(const std::string &key) const { return values_.count(key) != 0; }
  void set(const std::string &key, std::string value) { values_[key] = std::move(value); }

  // Each throws ConfigError naming the key when the value does not parse.
  std::string get_string(const std::string &key, const std::string &fallback);
  std::size_t get_size(const std::string &key, std::size_t fallback);
  std::uint64_t get_u64(const std::string &key, std::uint64_t fallback);
  int get_int(const std::string &key, int fallback);
  double get_double(const std::string &key, double fallback);
  bool get_bool(const std::string &key, bool fallback);
  /// Comma- or space-separated list of counts.
  std::vector<std::size_t> get_size_list(const std::string &key, std::vector<std::size_t> fallback);

  /// Throws ConfigError for the first key no accessor asked for.
  void reject_unused() const;

private:
  const std::string *lookup(const std::string &key);

  std::map<std::string, std::string> values_;
  std::map<std::string, bool> used_;
};

} // namespace pbrnn
