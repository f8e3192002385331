#pragma once
// Shared text-format helpers for model artifacts.
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "lithub/error.hpp"

namespace lithub::detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string expect_line(std::istream& in, const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::BadInput, "model file truncated, expected " + what);
  return line;
}

// Reads "key value" and returns value; throws when key differs.
inline std::string expect_key(std::istream& in, const std::string& key) {
  auto line = expect_line(in, key);
  if (line.rfind(key + ' ', 0) != 0) throw Error(Errc::BadInput, "model file: expected '" + key + "', got '" + line + "'");
  return line.substr(key.size() + 1);
}

inline void write_doubles(std::ostream& out, const std::vector<double>& values) {
  out << values.size() << '\n';
  for (double v : values) out << format_double(v) << '\n';
}

inline std::vector<double> read_doubles(std::istream& in) {
  auto count = std::stoull(expect_line(in, "array length"));
  std::vector<double> values(count);
  for (auto& v : values) v = std::stod(expect_line(in, "array value"));
  return values;
}

}  // namespace lithub::detail
