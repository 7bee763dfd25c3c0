#include "pbrnn/key_value.hpp"

#include "pbrnn/binary_io.hpp"
#include "pbrnn/errors.hpp"

#include <charconv>
#include <sstream>

namespace pbrnn {

namespace {

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T> T parse_number(const std::string &key, const std::string &text) {
  T value{};
  const char *end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key, "cannot parse '" + text + "' as a number");
  return value;
}

} // namespace

KeyValues KeyValues::parse(const std::string &text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
    if (kv.values_.count(key)) throw ConfigError(key, "given more than once");
    kv.values_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path &path) {
  if (!std::filesystem::exists(path)) throw ConfigError("", "config file not found: " + path.string());
  return parse(read_file(path));
}

const std::string *KeyValues::lookup(const std::string &key) {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_[key] = true;
  return &it->second;
}

std::string KeyValues::get_string(const std::string &key, const std::string &fallback) {
  const auto *v = lookup(key);
  return v ? *v : fallback;
}

std::size_t KeyValues::get_size(const std::string &key, std::size_t fallback) {
  const auto *v = lookup(key);
  return v ? parse_number<std::size_t>(key, *v) : fallback;
}

std::uint64_t KeyValues::get_u64(const std::string &key, std::uint64_t fallback) {
  const auto *v = lookup(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

int KeyValues::get_int(const std::string &key, int fallback) {
  const auto *v = lookup(key);
  return v ? parse_number<int>(key, *v) : fallback;
}

double KeyValues::get_double(const std::string &key, double fallback) {
  const auto *v = lookup(key);
  return v ? parse_number<double>(key, *v) : fallback;
}

bool KeyValues::get_bool(const std::string &key, bool fallback) {
  const auto *v = lookup(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + *v + "'");
}

std::vector<std::size_t> KeyValues::get_size_list(const std::string &key,
                                                  std::vector<std::size_t> fallback) {
  const auto *v = lookup(key);
  if (!v) return fallback;
  std::string text = *v;
  for (char &c : text)
    if (c == ',') c = ' ';
  std::istringstream in(text);
  std::vector<std::size_t> out;
  std::string item;
  while (in >> item) out.push_back(parse_number<std::size_t>(key, item));
  return out;
}

void KeyValues::reject_unused() const {
  for (const auto &[key, value] : values_)
    if (!used_.count(key)) throw ConfigError(key, "unknown key");
}

} // namespace pbrnn
