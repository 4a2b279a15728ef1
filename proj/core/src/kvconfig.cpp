#include "popnet/kvconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "popnet/errors.hpp"

namespace popnet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues KeyValues::parse(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(number, "expected 'key = value'");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(number, "empty key");
    if (!kv.values_.emplace(key, value).second) throw ParseError(number, "duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse(in);
}

const std::string& KeyValues::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double KeyValues::get_double(const std::string& key) const {
  const auto& text = raw(key);
  double out = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  }
  return out;
}

long long KeyValues::get_int(const std::string& key) const {
  const auto& text = raw(key);
  long long out = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
  }
  return out;
}

std::uint64_t KeyValues::get_u64(const std::string& key) const {
  const auto& text = raw(key);
  std::uint64_t out = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("key '" + key + "': '" + text + "' is not an unsigned 64-bit integer");
  }
  return out;
}

std::vector<double> KeyValues::get_doubles(const std::string& key) const {
  std::string text = raw(key);
  for (char& c : text) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    double x = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, x);
    if (ec != std::errc() || ptr != end) {
      throw ConfigError("key '" + key + "': '" + tok + "' is not a number");
    }
    out.push_back(x);
  }
  if (out.empty()) throw ConfigError("key '" + key + "' is empty");
  return out;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KeyValues::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::string KeyValues::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace popnet
