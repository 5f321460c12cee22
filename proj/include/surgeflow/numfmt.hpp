#pragma once

#include <charconv>
#include <string>

namespace surgeflow {

// Shortest decimal form that parses back to the identical double.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace surgeflow
