#pragma once

#include <cstdio>
#include <string>

namespace qlstm {

/// Deterministic decimal rendering shared by every table and CSV writer
/// ('.' separator, 9 significant digits).
inline std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

}  // namespace qlstm
