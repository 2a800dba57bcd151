#include "jsde/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "jsde/error.hpp"

namespace jsde {
namespace {

// Kronrod abscissae on [0, 1]; odd indices are the embedded Gauss nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace

QuadratureResult kronrod_panel(const RealFn& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  QuadratureResult r;
  r.value = kronrod * half;
  r.error = std::abs((kronrod - gauss) * half);
  r.evaluations = 15;
  if (!std::isfinite(r.value)) r.error = INFINITY;
  return r;
}

QuadratureResult integrate(const RealFn& f, double a, double b,
                           const QuadratureOptions& options) {
  if (a == b) return {};
  if (a > b) {
    QuadratureResult r = integrate(f, b, a, options);
    r.value = -r.value;
    return r;
  }
  std::priority_queue<Panel> heap;
  QuadratureResult first = kronrod_panel(f, a, b);
  int evaluations = first.evaluations;
  heap.push({a, b, first.value, first.error});
  double total = first.value;
  double total_error = first.error;
  int intervals = 1;
  auto done = [&] {
    return total_error <= std::max(options.abs_tol, options.rel_tol * std::abs(total));
  };
  while (!done() && intervals < options.max_intervals) {
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // no room left to split
    heap.pop();
    QuadratureResult left = kronrod_panel(f, worst.a, mid);
    QuadratureResult right = kronrod_panel(f, mid, worst.b);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    heap.push({worst.a, mid, left.value, left.error});
    heap.push({mid, worst.b, right.value, right.error});
    ++intervals;
  }
  // Resum to shed cancellation from the running updates.
  total = 0.0;
  total_error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_error += heap.top().error;
    heap.pop();
  }
  QuadratureResult r;
  r.value = total;
  r.error = total_error;
  r.evaluations = evaluations;
  r.converged = std::isfinite(total) &&
                total_error <= std::max(options.abs_tol, options.rel_tol * std::abs(total));
  return r;
}

QuadratureResult integrate(const RealFn& f, double a, double b,
                           std::span<const double> breakpoints,
                           const QuadratureOptions& options) {
  const bool reversed = a > b;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  std::vector<double> cuts{lo};
  for (double p : breakpoints)
    if (p > lo && p < hi) cuts.push_back(p);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(hi);
  QuadratureResult total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    QuadratureResult piece = integrate(f, cuts[i], cuts[i + 1], options);
    total.value += piece.value;
    total.error += piece.error;
    total.evaluations += piece.evaluations;
    total.converged = total.converged && piece.converged;
  }
  if (reversed) total.value = -total.value;
  return total;
}

double bisect(const RealFn& f, double lo, double hi, double x_tol, double f_tol,
              int max_iterations) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi))
    throw RangeError("bisect: root not bracketed");
  for (int i = 0; i < max_iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > std::min(lo, hi) && mid < std::max(lo, hi))) return mid;
    const double fm = f(mid);
    if (std::abs(fm) <= f_tol || std::abs(hi - lo) <= x_tol) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double central_difference(const RealFn& f, double x, double step) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

}  // namespace jsde
