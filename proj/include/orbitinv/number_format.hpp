#pragma once

#include <cstdio>
#include <string>

namespace orbitinv {

/// 17 significant digits: parses back to the same double.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace orbitinv
