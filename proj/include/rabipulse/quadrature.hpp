#pragma once

#include <cmath>
#include <cstddef>

#include "rabipulse/errors.hpp"

namespace rabipulse {

namespace detail {

template <class F>
double simpson_refine(F& f, double a, double fa, double m, double fm, double b, double fb, double whole,
                      double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_refine(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         simpson_refine(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to a relative tolerance.
///
/// The interval is first split into `panels` pieces; the absolute target is
/// rel_tol times a coarse estimate of \int |f|.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double rel_tol = 1e-10, std::size_t panels = 16,
                        int max_depth = 40) {
  if (b == a) return 0.0;
  if (!(rel_tol > 0.0)) throw ValidationError("quadrature tolerance must be positive");
  const double h = (b - a) / static_cast<double>(panels);

  double scale = 0.0;
  for (std::size_t k = 0; k <= 4 * panels; ++k) scale += std::abs(f(a + (b - a) * k / (4.0 * panels)));
  scale *= std::abs(b - a) / (4.0 * panels + 1.0);
  const double tol = rel_tol * (scale > 0.0 ? scale : 1.0) / static_cast<double>(panels);

  double sum = 0.0;
  double x0 = a;
  double f0 = f(a);
  for (std::size_t k = 0; k < panels; ++k) {
    const double x1 = (k + 1 == panels) ? b : a + h * static_cast<double>(k + 1);
    const double xm = 0.5 * (x0 + x1);
    const double fm = f(xm);
    const double f1 = f(x1);
    const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    sum += detail::simpson_refine(f, x0, f0, xm, fm, x1, f1, whole, tol, max_depth);
    x0 = x1;
    f0 = f1;
  }
  return sum;
}

}  // namespace rabipulse
