#pragma once

#include <charconv>
#include <string>

namespace focalflow {

// Shortest decimal form that parses back to the same bits. Keeps every text
// artifact (CSV, config echo) reproducible across runs.
inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace focalflow
