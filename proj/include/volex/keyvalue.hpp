#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace volex {

// Ordered `key value...` text records, one per line. '#' starts a comment
// line. Used for every sidecar manifest so that files diff cleanly.
class KeyValueFile {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, int value) { set(key, static_cast<long long>(value)); }
  void set(const std::string& key, const std::vector<double>& values);

  // Appends without replacing, for repeated records.
  void add(const std::string& key, const std::string& value);
  std::vector<std::string> get_all(const std::string& key) const;

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string to_string() const;
  static KeyValueFile parse(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static KeyValueFile load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Shortest text that round-trips a double exactly.
std::string format_double(double v);
double parse_double(const std::string& s);
long long parse_int(const std::string& s);

}  // namespace volex
