#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "fedqol/error.hpp"

namespace fedqol {

// Shortest decimal form that parses back to the identical double. This is the
// canonical float format for CSV cells, wire frames and serialized models.
inline std::string fmt_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline double parse_double(std::string_view s) {
  double v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw data_error("bad numeric literal: '" + std::string(s) + "'");
  }
  return v;
}

inline long parse_long(std::string_view s) {
  long v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw data_error("bad integer literal: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace fedqol
