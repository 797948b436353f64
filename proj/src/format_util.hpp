#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>

namespace rflow::detail {

// Shortest round-trip representation; "nan"/"inf" spelled out.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline std::string format_optional(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string{};
}

}  // namespace rflow::detail
