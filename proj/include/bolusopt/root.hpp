#pragma once

#include <cmath>
#include <cstddef>

namespace bolusopt {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Bracketed false position with the Illinois modification. Requires
/// f(lo) and f(hi) of opposite sign (or one of them zero). Stops when
/// |f| <= f_tol or the bracket is narrower than x_tol.
template <class F>
RootResult illinois_root(F&& f, double lo, double hi, double f_lo, double f_hi, double f_tol,
                         double x_tol, std::size_t max_iterations) {
  RootResult out;
  if (f_lo == 0.0) return {lo, 0.0, 0, true};
  if (f_hi == 0.0) return {hi, 0.0, 0, true};
  int side = 0;
  for (std::size_t i = 0; i < max_iterations; ++i) {
    double x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    // keep the secant point inside the bracket and away from stalls
    if (!(x > std::fmin(lo, hi) && x < std::fmax(lo, hi))) x = 0.5 * (lo + hi);
    const double fx = f(x);
    out = {x, fx, i + 1, false};
    if (std::fabs(fx) <= f_tol) {
      out.converged = true;
      return out;
    }
    if ((fx > 0) == (f_hi > 0)) {
      hi = x;
      f_hi = fx;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    } else {
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    }
    if (std::fabs(hi - lo) <= x_tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace bolusopt
