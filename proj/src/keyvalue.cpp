#include "volex/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "volex/error.hpp"
#include "volex/tensor.hpp"

namespace volex {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "not a number: '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "not an integer: '" + s + "'");
  }
  return v;
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void KeyValueFile::set(const std::string& key, double value) { set(key, format_double(value)); }

void KeyValueFile::set(const std::string& key, long long value) {
  set(key, std::to_string(value));
}

void KeyValueFile::set(const std::string& key, const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s.push_back(' ');
    s += format_double(values[i]);
  }
  set(key, s);
}

void KeyValueFile::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

std::vector<std::string> KeyValueFile::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out.push_back(v);
  }
  return out;
}

bool KeyValueFile::has(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

const std::string& KeyValueFile::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw Error(ErrorCode::kParse, "missing key '" + key + "'");
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double KeyValueFile::get_double(const std::string& key) const { return parse_double(get(key)); }

long long KeyValueFile::get_int(const std::string& key) const { return parse_int(get(key)); }

std::vector<double> KeyValueFile::get_doubles(const std::string& key) const {
  std::istringstream in(get(key));
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok));
  return out;
}

std::string KeyValueFile::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    if (!v.empty()) {
      out.push_back(' ');
      out += v;
    }
    out.push_back('\n');
  }
  return out;
}

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto sep = line.find_first_of(" \t");
    if (sep == std::string::npos) {
      kv.add(line, std::string());
    } else {
      kv.add(line.substr(0, sep), line.substr(line.find_first_not_of(" \t", sep)));
    }
  }
  return kv;
}

void KeyValueFile::save(const std::filesystem::path& path) const {
  const std::string text = to_string();
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse(std::string(bytes.begin(), bytes.end()));
}

}  // namespace volex
