#pragma once

#include <functional>
#include <span>

namespace jsde {

using RealFn = std::function<double(double)>;

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  int evaluations = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature of f over [a, b].
/// The interval with the largest local error estimate is bisected until the
/// summed estimate drops below max(abs_tol, rel_tol * |value|). Reversed
/// limits return the negated integral.
QuadratureResult integrate(const RealFn& f, double a, double b,
                           const QuadratureOptions& options = {});

/// Same, with the range split at the sorted interior `breakpoints` (points
/// outside (a, b) are ignored). Use for integrands with kinks or jumps.
QuadratureResult integrate(const RealFn& f, double a, double b,
                           std::span<const double> breakpoints,
                           const QuadratureOptions& options = {});

/// Single 15-point Kronrod panel; returns value and |K15 - G7| estimate.
QuadratureResult kronrod_panel(const RealFn& f, double a, double b);

/// Bracketed bisection for a root of f in [lo, hi]. Stops when the bracket
/// is narrower than x_tol or |f| < f_tol. Throws RangeError when f(lo) and
/// f(hi) have the same sign.
double bisect(const RealFn& f, double lo, double hi, double x_tol = 1e-10,
              double f_tol = 0.0, int max_iterations = 400);

/// Central difference derivative with the project-wide default step.
double central_difference(const RealFn& f, double x, double step = 1e-6);

}  // namespace jsde
