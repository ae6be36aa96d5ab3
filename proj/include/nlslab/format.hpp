#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace nlslab {

// Shortest decimal string that round-trips to the same double. Keeps the
// canonical config printable ("0.005" instead of "0.0050000000000000001")
// while staying bit-faithful, which the byte-determinism contract needs.
inline std::string fmt_double(double x) {
  for (int prec = 15; prec < 17; ++prec) {
    char trial[48];
    std::snprintf(trial, sizeof trial, "%.*g", prec, x);
    if (std::strtod(trial, nullptr) == x) return trial;
  }
  char best[48];
  std::snprintf(best, sizeof best, "%.17g", x);
  return best;
}

}  // namespace nlslab
