#pragma once

#include <cstdio>
#include <string>

namespace netform {

/// Shortest form that round-trips: 17 significant digits.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace netform
