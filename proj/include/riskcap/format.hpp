#pragma once

#include <charconv>
#include <string>

namespace riskcap {

// Shortest round-trip decimal representation; keeps CSV output lossless
// and byte-stable across runs.
inline std::string fmt_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace riskcap
