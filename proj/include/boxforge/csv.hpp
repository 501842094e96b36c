// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <string>

namespace boxforge {

/// Six-decimal fixed-point formatting, the one number format every CSV in
/// this project uses so outputs stay byte-diffable.
inline std::string fixed6(double v) {
  if (v == 0) v = 0;  // normalize -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace boxforge
