#ifndef ROBUSTDX_SRC_GOLDEN_HPP
#define ROBUSTDX_SRC_GOLDEN_HPP

#include <cmath>
#include <utility>

namespace robustdx::detail {

/// Golden-section search for a maximum of `f` on [lo, hi]. Stops when the
/// bracket is narrower than `tol` or after `max_evals` evaluations. Returns the
/// best (argument, value) seen, endpoints excluded.
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double tol, long max_evals) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  if (max_evals < 2) {
    const double mid = 0.5 * (a + b);
    return {mid, max_evals < 1 ? -INFINITY : f(mid)};
  }
  double f1 = f(x1);
  double f2 = f(x2);
  long evals = 2;
  std::pair<double, double> best = f1 >= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
  while (b - a > tol && evals < max_evals) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
      if (f1 > best.second) best = {x1, f1};
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
      if (f2 > best.second) best = {x2, f2};
    }
    ++evals;
  }
  return best;
}

}  // namespace robustdx::detail

#endif  // ROBUSTDX_SRC_GOLDEN_HPP
