#pragma once

#include <charconv>
#include <string>

namespace bolusopt {

/// Locale-independent shortest round-trip decimal representation.
inline std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace bolusopt
