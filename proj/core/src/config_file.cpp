#include "copo/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "copo/errors.hpp"
#include "numeric.hpp"

namespace copo {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto end = s.find(sep, start);
    parts.push_back(trim(s.substr(start, end == std::string_view::npos ? s.npos : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* kind) {
  throw PreconditionError("config key '" + key + "': expected " + kind + ", got '" + value + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& source) {
  KeyValueConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      throw PreconditionError(where + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw PreconditionError(where + ": empty key");
    if (cfg.contains(key)) throw PreconditionError(where + ": duplicate key '" + key + "'");
    cfg.entries_.emplace(key, value);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    return detail::parse_double(*v);
  } catch (const std::invalid_argument&) {
    bad_value(key, *v, "a number");
  }
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  long long out = 0;
  auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size()) bad_value(key, *v, "an integer");
  return out;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key,
                                                std::vector<double> fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::vector<double> out;
  try {
    for (auto part : split(*v, ',')) out.push_back(detail::parse_double(part));
  } catch (const std::invalid_argument&) {
    bad_value(key, *v, "a comma-separated list of numbers");
  }
  return out;
}

std::vector<Arm> KeyValueConfig::get_arms(const std::string& key, std::vector<Arm> fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::vector<Arm> out;
  try {
    for (auto part : split(*v, ',')) out.push_back(Arm::parse(part));
  } catch (const std::invalid_argument&) {
    bad_value(key, *v, "a comma-separated list of ';'-separated arms");
  }
  return out;
}

}  // namespace copo
