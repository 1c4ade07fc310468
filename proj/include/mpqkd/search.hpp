#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace mpqkd::search {

struct Extremum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for a minimum of f on [lo, hi]. Stops once the
/// bracket is no wider than width_tol. The returned point is the best one
/// evaluated, so it never does worse than the supplied seed value.
template <class F>
Extremum golden_section_minimize(const F& f, double lo, double hi, double width_tol,
                                 Extremum seed = {0.0, std::numeric_limits<double>::infinity()}) {
  constexpr double kInvPhi = 0.6180339887498948482;
  Extremum best = seed;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int iter = 0; iter < 500 && (b - a) > width_tol; ++iter) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  if (fc < best.value) best = {c, fc};
  if (fd < best.value) best = {d, fd};
  return best;
}

/// Dense uniform grid over [lo, hi] followed by golden-section refinement
/// between the neighbours of the best grid point.
template <class F>
Extremum grid_golden_minimize(const F& f, double lo, double hi, std::size_t grid_points,
                              double width_tol) {
  if (!(hi > lo)) {
    return {lo, f(lo)};
  }
  if (grid_points < 3) {
    throw std::invalid_argument("grid_golden_minimize needs at least 3 grid points");
  }
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  std::size_t best_i = 0;
  Extremum best{lo, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = (i + 1 == grid_points) ? hi : lo + step * static_cast<double>(i);
    const double v = f(x);
    if (v < best.value) {
      best = {x, v};
      best_i = i;
    }
  }
  const double a = best_i == 0 ? lo : lo + step * static_cast<double>(best_i - 1);
  const double b = best_i + 1 >= grid_points ? hi : lo + step * static_cast<double>(best_i + 1);
  return golden_section_minimize(f, a, b, width_tol, best);
}

/// Bisection on the sign of f. Requires f(lo) > 0 >= f(hi); returns the final
/// bracket midpoint once hi - lo <= tol.
template <class F>
double bisect_sign(const F& f, double lo, double hi, double tol) {
  for (int iter = 0; iter < 200 && (hi - lo) > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mpqkd::search
