#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace kernrec {

/// Shortest decimal text that reads back to the same double; "inf", "-inf"
/// and "nan" for non-finite values. Locale-independent.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

}  // namespace kernrec
