#pragma once

#include <charconv>
#include <string>
#include <string_view>

namespace pggp {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace pggp
