#pragma once

#include <cstdio>
#include <string>

namespace foldsense::detail {

// printf-style %.<digits>g; 17 digits round-trips a double.
inline std::string fmt_g(double v, int digits = 17) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace foldsense::detail
