#pragma once

#include <charconv>
#include <string>

namespace semimyopic {

/// Shortest round-trip decimal form of a double, independent of locale.
inline std::string format_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer, end);
}

}  // namespace semimyopic
