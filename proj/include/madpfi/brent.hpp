// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_BRENT_HPP
#define MADPFI_BRENT_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "madpfi/errors.hpp"

namespace madpfi {

struct MinimizeResult {
  double x = 0;
  double fx = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::pair<double, double>> trace;  // every (x, f(x)) evaluated
};

/// Brent's bounded scalar minimizer (golden section with parabolic
/// interpolation accepted when it halves the step two iterations back).
/// Stops when the bracket shrinks to x_tol around the minimizer or when the
/// best function value stops moving by more than f_rel_tol relatively over
/// three consecutive accepted points.
template <typename F>
MinimizeResult brent_minimize(F&& f, double lo, double hi,
                              double x_tol = 1e-9, double f_rel_tol = 1e-12,
                              int max_iter = 200) {
  if (!(lo < hi)) throw ValidationError("brent_minimize: empty interval");
  static constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt(5))/2

  MinimizeResult res;
  auto eval = [&](double x) {
    const double v = f(x);
    res.trace.emplace_back(x, v);
    return v;
  };

  double a = lo, b = hi;
  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = eval(x);
  double fw = fx, fv = fx;
  double d = 0, e = 0;
  int flat_streak = 0;

  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    const double m = 0.5 * (a + b);
    const double tol = x_tol + 4.0 * 2.220446049250313e-16 * std::fabs(x);
    if (std::fabs(x - m) <= 2.0 * tol - 0.5 * (b - a) || flat_streak >= 3) {
      res.converged = true;
      break;
    }
    double step;
    bool parabolic = false;
    if (std::fabs(e) > tol) {
      // Parabola through (v,fv), (w,fw), (x,fx).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0) p = -p;
      q = std::fabs(q);
      const double e_prev = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * e_prev) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u_try = x + d;
        // Keep evaluations off the interval ends.
        if (u_try - a < 2.0 * tol || b - u_try < 2.0 * tol)
          d = (x < m) ? tol : -tol;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = kGolden * e;
    }
    const double u =
        x + ((std::fabs(d) >= tol) ? d : (d > 0 ? tol : -tol));
    const double fu = eval(u);

    if (fu <= fx) {
      if (std::fabs(fx - fu) <= f_rel_tol * (std::fabs(fu) + 1e-300))
        ++flat_streak;
      else
        flat_streak = 0;
      if (u < x)
        b = x;
      else
        a = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  res.x = x;
  res.fx = fx;
  return res;
}

}  // namespace madpfi

#endif  // MADPFI_BRENT_HPP
