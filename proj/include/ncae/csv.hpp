#pragma once
// Round-trip decimal formatting for CSV output (17 significant digits).

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace ncae {

/// Shortest-faithful fixed formatting: 17 significant digits round-trip
/// any IEEE double through decimal.
inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  return out;
}

}  // namespace ncae
