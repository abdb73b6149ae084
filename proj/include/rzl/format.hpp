#pragma once

#include <charconv>
#include <string>

namespace rzl {

/// Shortest-round-trip is not enough for byte-stable output across tools;
/// CSV values always carry 17 significant digits, independent of locale.
inline std::string fmt17(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace rzl
