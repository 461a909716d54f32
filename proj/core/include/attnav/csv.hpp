#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace attnav::csv {

/// 17 significant digits ("%.17g"); reads back to the same double.
std::string format(double x);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Throws ParseError naming `column` when the field is not a full number.
double parse_double(std::string_view field, std::string_view column);
long parse_long(std::string_view field, std::string_view column);

/// Column name -> index lookup over a header row; throws ParseError for a
/// missing column.
class Header {
 public:
  explicit Header(std::string_view line);
  std::size_t at(std::string_view name) const;
  bool has(std::string_view name) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

}  // namespace attnav::csv
