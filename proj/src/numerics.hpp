#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace thickstab::detail {

struct Extremum {
  double x;
  double value;
};

// Golden-section search for a minimum of f on [a, b]. Endpoints are
// included in the candidate set so monotone functions land exactly on them.
template <class Fn>
Extremum golden_minimize(Fn&& f, double a, double b, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  Extremum best{a, f(a)};
  const double fb = f(b);
  if (fb < best.value) best = {b, fb};
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 400 && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc < best.value) best = {c, fc};
  if (fd < best.value) best = {d, fd};
  return best;
}

// Uniform scan with `points` samples on [a, b] then golden refinement
// around the best sample.
template <class Fn>
Extremum scan_minimize(Fn&& f, double a, double b, int points, double tol) {
  const double h = (b - a) / (points - 1);
  int best = 0;
  double best_value = f(a);
  for (int i = 1; i < points; ++i) {
    const double v = f(i == points - 1 ? b : a + h * i);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double lo = best == 0 ? a : a + h * (best - 1);
  const double hi = best == points - 1 ? b : a + h * (best + 1);
  Extremum refined = golden_minimize(f, lo, hi, tol);
  if (best_value <= refined.value) refined = {best == points - 1 ? b : a + h * best, best_value};
  return refined;
}

// 53-bit uniform double in [0, 1) from a 64-bit engine output; stable across
// standard libraries unlike std::uniform_real_distribution.
inline double unit_uniform(std::uint64_t bits) { return double(bits >> 11) * 0x1.0p-53; }

}  // namespace thickstab::detail
