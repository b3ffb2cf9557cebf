#pragma once

#include <functional>

#include "spectator/spectral_density.hpp"

namespace spectator {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< absolute error estimate, truncation bounds included
  bool converged = false;
  long evaluations = 0;
};

/// Even weight function w(omega) for integrals  int dw/2pi S[w] w(w).
///
/// Weights are stored in the factored form
///     w(w) = shape(w) * 4 sin^2(w t/2) / w^2        (windowed, t = osc_time)
///     w(w) = shape(w)                               (not windowed)
/// which is what the oscillation-aware integrator needs: `shape` must be
/// smooth and bounded by `shape_bound`, with characteristic frequency scale
/// `shape_scale` (0 if flat). For non-windowed weights of compact support
/// set `shape_cutoff` to the frequency beyond which the weight vanishes.
struct SpectralWeight {
  std::function<double(double)> shape;
  bool windowed = false;
  double osc_time = 0.0;
  double shape_bound = 1.0;
  double shape_scale = 0.0;
  double shape_cutoff = 0.0;

  static SpectralWeight with_window(std::function<double(double)> shape,
                                    double t, double bound, double scale = 0.0);

  /// Full weight value; safe at omega = 0.
  double operator()(double omega) const;
};

/// int_{-inf}^{inf} dw/2pi S[w] w(w) = (1/pi) int_0^inf S(w) w(w) dw.
///
/// Adaptive Gauss-Kronrod panels seeded at the sin^2 period boundaries
/// 2 pi k / t near the origin; beyond a few periods the oscillatory factor is
/// split as 2 - 2 cos(w t) and the cosine part is integrated with a composite
/// Filon rule, so cost stays bounded for arbitrarily large t. The upper
/// cutoff comes from the spectrum's tail bound against the 1/w^2 envelope.
///
/// Never throws on non-convergence: inspect `converged`/`error` (callers that
/// cannot proceed convert this into a convergence error themselves).
QuadratureResult weighted_integral(const SpectralDensity& s,
                                   const SpectralWeight& w, double tol = 1e-8);

}  // namespace spectator
