#include "attnav/csv.hpp"

#include <charconv>
#include <cstdio>

#include "attnav/error.hpp"

namespace attnav::csv {

std::string format(double x) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

double parse_double(std::string_view field, std::string_view column) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw Error(Errc::ParseError,
                "bad number '" + std::string(field) + "' in column " + std::string(column));
  }
  return value;
}

long parse_long(std::string_view field, std::string_view column) {
  field = trim(field);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw Error(Errc::ParseError,
                "bad integer '" + std::string(field) + "' in column " + std::string(column));
  }
  return value;
}

Header::Header(std::string_view line) {
  for (auto name : split(line)) names_.emplace_back(trim(name));
}

std::size_t Header::at(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw Error(Errc::ParseError, "missing CSV column " + std::string(name));
}

bool Header::has(std::string_view name) const {
  for (const auto& n : names_) {
    if (n == name) return true;
  }
  return false;
}

}  // namespace attnav::csv
