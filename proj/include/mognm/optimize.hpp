#pragma once

#include <cmath>
#include <utility>

namespace mognm {

/// Golden-section minimisation of a unimodal `f` on [lo, hi].
/// Returns the midpoint of the final bracket (width <= tol).
template <class F>
[[nodiscard]] double golden_section_minimize(F&& f, double lo, double hi, double tol = 1e-6, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  if (lo > hi) std::swap(lo, hi);
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (hi - lo) > tol; ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mognm
