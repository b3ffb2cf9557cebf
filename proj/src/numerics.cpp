#include "spectator/numerics.hpp"

#include <algorithm>

namespace spectator {

double bisect_root(const std::function<double(double)>& f, double a, double b,
                   double x_tol, int max_iter) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0)
    throw Error("convergence:no_bracket",
                "bisect_root: endpoints do not bracket a sign change");
  for (int i = 0; i < max_iter && (b - a) > x_tol; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if (fa * fm < 0.0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

double golden_min(const std::function<double(double)>& f, double a, double b,
                  double rel_tol, int max_iter) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < max_iter; ++i) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    if ((b - a) <= rel_tol * scale) break;
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  // Tie-break toward the left end on flat objectives.
  return f1 <= f2 ? x1 : x2;
}

LinearFit fit_line(const double* x, const double* y, int n) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double d = n * sxx - sx * sx;
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / d;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace spectator
