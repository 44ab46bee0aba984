#pragma once

// Brute-force optimality reference, written directly from the distance
// definition in extended precision. Shares no code with the library kernels.

#include <cmath>
#include <limits>
#include <vector>

#include "rass/moo.hpp"

namespace oracle {

struct Score {
  long double d = 0;
  long double d_s = 0;
  long double opt = 0;
  bool utopia = false;
};

inline std::vector<Score> optimality(const rass::ObjectiveMatrix& m) {
  const std::size_t n = m.rows, k = m.cols;
  std::vector<long double> up(k), var(k), lo(k), hi(k);
  for (std::size_t c = 0; c < k; ++c) {
    long double sum = 0;
    lo[c] = hi[c] = m.at(0, c);
    for (std::size_t r = 0; r < n; ++r) {
      const long double v = m.at(r, c);
      sum += v;
      if (v < lo[c]) lo[c] = v;
      if (v > hi[c]) hi[c] = v;
    }
    const long double mean = sum / n;
    long double ss = 0;
    for (std::size_t r = 0; r < n; ++r) ss += (m.at(r, c) - mean) * (m.at(r, c) - mean);
    var[c] = ss / n;
    up[c] = m.directions[c] == rass::Direction::Maximize ? hi[c] : lo[c];
  }
  long double dmax2 = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const long double span = hi[c] - lo[c];
    if (span == 0 || var[c] == 0) continue;
    const long double w = m.weights[c];
    dmax2 += w * w * span * span / var[c];
  }
  std::vector<Score> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    long double d2 = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const long double diff = m.at(r, c) - up[c];
      if (diff == 0 || var[c] == 0) continue;
      const long double w = m.weights[c];
      d2 += w * w * diff * diff / var[c];
    }
    Score& s = out[r];
    s.d = std::sqrt(d2);
    if (dmax2 == 0 || s.d == 0) {
      s.utopia = true;
      s.opt = std::numeric_limits<long double>::infinity();
      continue;
    }
    s.d_s = s.d / std::sqrt(dmax2);
    s.opt = 1 / s.d_s;
  }
  return out;
}

/// |a - b| <= tol * max(|a|, |b|), with exact equality accepted.
inline bool close(long double a, long double b, long double tol = 1e-9L) {
  if (a == b) return true;
  return std::fabs(a - b) <= tol * std::fmax(std::fabs(a), std::fabs(b));
}

}  // namespace oracle
