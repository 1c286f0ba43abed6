#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mathemb/error.hpp"

namespace mathemb::detail {

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

/// Shortest representation that parses back to the same double.
inline std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string fixed(double v, int precision) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, end);
}

inline double parse_double(std::string_view s, ErrorCode on_error, const std::string& context) {
  double v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw Error(on_error, context + ": not a number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline void write_provenance(std::ostream& out, std::string_view provenance) {
  std::size_t start = 0;
  while (start < provenance.size()) {
    auto nl = provenance.find('\n', start);
    if (nl == std::string_view::npos) nl = provenance.size();
    out << "# " << provenance.substr(start, nl - start) << '\n';
    start = nl + 1;
  }
}

/// Reads the next line that is not a '#' comment; false at end of stream.
inline bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') continue;
    return true;
  }
  return false;
}

inline void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::BadFormat, "empty file, expected '" + std::string(header) + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw Error(ErrorCode::BadFormat, "expected header '" + std::string(header) + "', got '" + line + "'");
}

/// Portable draws from mt19937_64: the distribution classes in <random> are
/// implementation-defined, these are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi].
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    auto span = hi - lo + 1;
    return lo + static_cast<std::uint64_t>(uniform() * static_cast<double>(span)) % span;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mathemb::detail
