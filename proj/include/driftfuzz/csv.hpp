#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "driftfuzz/error.hpp"
#include "driftfuzz/observation_set.hpp"

namespace driftfuzz {

namespace csv_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool is_missing_token(std::string_view s) {
  if (s.empty()) return true;
  if (s.size() != 3) return false;
  return std::tolower(static_cast<unsigned char>(s[0])) == 'n' &&
         std::tolower(static_cast<unsigned char>(s[1])) == 'a' &&
         std::tolower(static_cast<unsigned char>(s[2])) == 'n';
}

}  // namespace csv_detail

/// Reads a header + numeric body. Empty cells and `nan` (any case) are
/// missing. Rows with every cell missing are rejected with their index.
inline ObservationSet read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, "empty input, expected a header line");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
    line.erase(0, 3);
  std::vector<std::string> names;
  for (auto tok : csv_detail::split(line)) names.emplace_back(tok);
  const std::size_t n = names.size();

  std::vector<double> values;
  std::vector<std::uint8_t> missing;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv_detail::trim(line).empty()) continue;
    auto cells = csv_detail::split(line);
    if (cells.size() != n)
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " + std::to_string(n) +
                                      " fields, got " + std::to_string(cells.size()));
    bool any_present = false;
    for (auto c : cells) {
      if (csv_detail::is_missing_token(c)) {
        values.push_back(kMissingValue);
        missing.push_back(1);
        continue;
      }
      double v = 0.0;
      const char* first = c.data();
      if (!c.empty() && c.front() == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size() || std::isnan(v))
        fail(ErrorCode::ParseError,
             "line " + std::to_string(line_no) + ": cannot parse '" + std::string(c) + "' as a number");
      values.push_back(v);
      missing.push_back(0);
      any_present = true;
    }
    if (!any_present)
      fail(ErrorCode::DegenerateRow, "data row " + std::to_string(rows) + " (line " +
                                         std::to_string(line_no) + ") has every cell missing");
    ++rows;
  }
  if (rows == 0) fail(ErrorCode::ParseError, "no data rows");
  return ObservationSet(rows, n, std::move(values), std::move(missing), std::move(names));
}

inline ObservationSet read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  return read_csv(in);
}

inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Writes the shortest round-trip representation; missing cells are empty.
inline void write_csv(std::ostream& out, const ObservationSet& data) {
  const auto& names = data.column_names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (j) out << ',';
      if (!data.is_missing(i, j)) out << format_double(data.value(i, j));
    }
    out << '\n';
  }
}

inline void write_csv_file(const std::string& path, const ObservationSet& data) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  write_csv(out, data);
  if (!out) fail(ErrorCode::IoError, "write to '" + path + "' failed");
}

}  // namespace driftfuzz
