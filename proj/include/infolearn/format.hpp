#pragma once

// Locale-independent number formatting for CSV/JSON outputs.

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace infolearn {

/// Shortest round-trip decimal representation; "nan", "inf", "-inf" otherwise.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

}  // namespace infolearn
