#include "spectator/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "spectator/numerics.hpp"

namespace spectator {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 7-15 Gauss-Kronrod pair (QUADPACK constants).
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277,
                           0.381830050505119, 0.417959183673469};

using Fn = std::function<double(double)>;

struct PanelEstimate {
  double value = 0.0;
  double error = 0.0;
};

PanelEstimate gk15(const Fn& f, double a, double b, long& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double fsum = f(c - x) + f(c + x);
    kronrod += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  evals += 15;
  return {kronrod * h, std::abs(kronrod - gauss) * h};
}

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// Adaptive bisection over seeded panels until the summed error estimate
// drops below abs_target or the panel budget runs out.
PanelEstimate adaptive_gk(const Fn& f, const std::vector<double>& seeds,
                          double abs_target, long& evals,
                          int max_panels = 3000) {
  std::priority_queue<Panel> queue;
  double total = 0.0, err = 0.0;
  int count = 0;
  for (size_t i = 0; i + 1 < seeds.size(); ++i) {
    if (seeds[i + 1] <= seeds[i]) continue;
    const auto est = gk15(f, seeds[i], seeds[i + 1], evals);
    queue.push({seeds[i], seeds[i + 1], est.value, est.error});
    total += est.value;
    err += est.error;
    ++count;
  }
  while (err > abs_target && count < max_panels && !queue.empty()) {
    const Panel worst = queue.top();
    if (worst.error <= 0.0) break;
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) break;  // width at rounding limit
    const auto left = gk15(f, worst.a, mid, evals);
    const auto right = gk15(f, mid, worst.b, evals);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    queue.push({worst.a, mid, left.value, left.error});
    queue.push({mid, worst.b, right.value, right.error});
    ++count;
  }
  return {total, std::max(err, 0.0)};
}

// Filon cosine coefficients; series for small theta where the closed forms
// lose digits.
void filon_coeffs(double th, double& alpha, double& beta, double& gamma) {
  if (std::abs(th) < 0.1) {
    const double t2 = th * th;
    alpha = th * t2 * (2.0 / 45.0 - t2 * (2.0 / 315.0 - t2 * (2.0 / 4725.0)));
    beta = 2.0 / 3.0 + t2 * (2.0 / 15.0 - t2 * (4.0 / 105.0 - t2 * (2.0 / 567.0)));
    gamma = 4.0 / 3.0 - t2 * (2.0 / 15.0 - t2 * (1.0 / 210.0 - t2 / 11340.0));
    return;
  }
  const double s = std::sin(th), c = std::cos(th);
  const double t3 = th * th * th;
  alpha = (th * th + th * s * c - 2.0 * s * s) / t3;
  beta = 2.0 * (th * (1.0 + c * c) - 2.0 * s * c) / t3;
  gamma = 4.0 * (s - th * c) / t3;
}

// Classic composite Filon rule for int_a^b f(x) cos(k x) dx on 2m intervals.
double filon_cos(const Fn& f, double a, double b, double k, int m,
                 long& evals) {
  const int n = 2 * m;
  const double h = (b - a) / n;
  double alpha, beta, gamma;
  filon_coeffs(k * h, alpha, beta, gamma);
  double even = 0.0, odd = 0.0;
  double fa = 0.0, fb = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double x = a + j * h;
    const double fx = f(x);
    if (j == 0) fa = fx;
    if (j == n) fb = fx;
    (j % 2 == 0 ? even : odd) += fx * std::cos(k * x);
  }
  evals += n + 1;
  even -= 0.5 * (fa * std::cos(k * a) + fb * std::cos(k * b));
  return h * (alpha * (fb * std::sin(k * b) - fa * std::sin(k * a)) +
              beta * even + gamma * odd);
}

PanelEstimate adaptive_filon(const Fn& f, double a, double b, double k,
                             double abs_target, long& evals) {
  int m = 4;
  double prev = filon_cos(f, a, b, k, m, evals);
  for (;;) {
    m *= 2;
    const double cur = filon_cos(f, a, b, k, m, evals);
    const double delta = std::abs(cur - prev);
    if (delta <= abs_target || m >= (1 << 15)) return {cur, delta};
    prev = cur;
  }
}

std::vector<double> geometric_seeds(double a, double b, int min_panels = 1) {
  std::vector<double> seeds{a};
  double x = a;
  while (x < b) {
    x = std::min(2.0 * x, b);
    seeds.push_back(x);
  }
  while (static_cast<int>(seeds.size()) - 1 < min_panels) seeds.push_back(b);
  return seeds;
}

}  // namespace

SpectralWeight SpectralWeight::with_window(std::function<double(double)> shape,
                                           double t, double bound,
                                           double scale) {
  SpectralWeight w;
  w.shape = std::move(shape);
  w.windowed = true;
  w.osc_time = t;
  w.shape_bound = bound;
  w.shape_scale = scale;
  return w;
}

double SpectralWeight::operator()(double omega) const {
  const double h = shape ? shape(std::abs(omega)) : 1.0;
  if (windowed) return h * fid_window(omega, osc_time);
  if (shape_cutoff > 0.0 && std::abs(omega) > shape_cutoff) return 0.0;
  return h;
}

QuadratureResult weighted_integral(const SpectralDensity& s,
                                   const SpectralWeight& w, double tol) {
  QuadratureResult res;
  if (s.is_zero() || (w.windowed && w.osc_time == 0.0)) {
    res.converged = true;
    return res;
  }

  const double inv_pi = 1.0 / kPi;
  const double tiny = std::numeric_limits<double>::min() * 1e16;

  // ---- non-windowed weight ---------------------------------------------
  if (!w.windowed) {
    const Fn f = [&](double x) { return inv_pi * s(x) * w(x); };
    double cutoff = s.support_max();
    if (w.shape_cutoff > 0.0) cutoff = std::min(cutoff, w.shape_cutoff);
    double tail = 0.0;
    bool cap_hit = false;
    if (!std::isfinite(cutoff)) {
      // no decay information: extend geometrically and keep the last-block
      // contribution as the (unproven) tail estimate
      const double scale = std::max({s.frequency_scale(), w.shape_scale, 1.0});
      cutoff = 1e9 * scale;
      cap_hit = true;
      tail = std::abs(f(cutoff)) * cutoff;  // crude; flags non-convergence
    }
    const double scale =
        std::max({s.frequency_scale(), w.shape_scale, cutoff * 1e-6});
    std::vector<double> seeds{0.0};
    for (const double x : geometric_seeds(std::min(scale, cutoff), cutoff))
      seeds.push_back(x);
    auto est = adaptive_gk(f, seeds, 0.0, res.evaluations, 40);
    est = adaptive_gk(f, seeds, tol * std::max(std::abs(est.value), tiny),
                      res.evaluations);
    res.value = est.value;
    res.error = est.error + tail;
    res.converged =
        !cap_hit && res.error <= tol * std::max(std::abs(res.value), tiny);
    return res;
  }

  // ---- oscillatory weight:  shape * 4 sin^2(w t/2) / w^2 ---------------
  const double t = w.osc_time;
  const double period = 2.0 * kPi / t;
  const double hard_max = s.support_max();

  const Fn direct = [&](double x) {
    return inv_pi * s(x) * w.shape(x) * fid_window(x, t);
  };
  // beyond b0 the window is split as (2 - 2 cos(w t)) / w^2
  const Fn smooth_part = [&](double x) {
    return inv_pi * 2.0 * s(x) * w.shape(x) / (x * x);
  };

  const double b0 = std::min(8.0 * period, hard_max);
  std::vector<double> b0_seeds;
  for (int k = 0; k <= 8; ++k) {
    const double x = k * period;
    if (x >= b0) break;
    b0_seeds.push_back(x);
  }
  b0_seeds.push_back(b0);
  auto head = adaptive_gk(direct, b0_seeds, 0.0, res.evaluations, 16);
  double magnitude = std::max(std::abs(head.value), tiny);

  // upper cutoff from the spectrum tail against the 4*shape_bound/w^2 envelope
  double cutoff = b0;
  bool cap_hit = false;
  if (hard_max > b0) {
    const double scale = std::max({s.frequency_scale(), w.shape_scale, b0});
    cutoff = std::min(32.0 * scale, hard_max);
    const double cap = std::max(1e14 * scale, 1e14);
    while (inv_pi * 4.0 * w.shape_bound * s.tail_over_omega_sq(cutoff) >
           0.125 * tol * magnitude) {
      if (cutoff >= hard_max) break;
      if (cutoff >= cap) {
        cap_hit = true;
        break;
      }
      cutoff = std::min({4.0 * cutoff, hard_max, cap});
    }
  }
  const double tail_bound =
      cutoff < hard_max
          ? inv_pi * 4.0 * w.shape_bound * s.tail_over_omega_sq(cutoff)
          : 0.0;

  head = adaptive_gk(direct, b0_seeds, 0.05 * tol * magnitude,
                     res.evaluations);
  res.value = head.value;
  res.error = head.error + tail_bound;

  if (cutoff > b0) {
    // smooth remainder
    auto smooth = adaptive_gk(smooth_part, geometric_seeds(b0, cutoff), 0.0,
                              res.evaluations, 60);
    magnitude = std::max(magnitude, std::abs(head.value + smooth.value));
    smooth = adaptive_gk(smooth_part, geometric_seeds(b0, cutoff),
                         0.1 * tol * magnitude, res.evaluations);
    res.value += smooth.value;
    res.error += smooth.error;

    // oscillatory remainder: cut where the integration-by-parts bound
    // 2 f(A)/t falls below the budget
    double osc_cut = b0;
    const auto osc_rest_bound = [&](double a) {
      return 2.0 / t * inv_pi * 2.0 * s(a) * w.shape_bound / (a * a);
    };
    while (osc_cut < cutoff && osc_rest_bound(osc_cut) > 0.05 * tol * magnitude)
      osc_cut = std::min(2.0 * osc_cut, cutoff);

    if (osc_cut > b0) {
      const auto macro = geometric_seeds(b0, osc_cut);
      const double per_panel = 0.05 * tol * magnitude / macro.size();
      double cos_total = 0.0, cos_err = 0.0;
      for (size_t i = 0; i + 1 < macro.size(); ++i) {
        const auto piece = adaptive_filon(smooth_part, macro[i], macro[i + 1],
                                          t, per_panel, res.evaluations);
        cos_total += piece.value;
        cos_err += piece.error;
      }
      res.value -= cos_total;
      res.error += cos_err;
    }
    if (osc_cut < cutoff) res.error += osc_rest_bound(osc_cut);
  }

  res.converged =
      !cap_hit && res.error <= tol * std::max(std::abs(res.value), tiny);
  return res;
}

}  // namespace spectator
