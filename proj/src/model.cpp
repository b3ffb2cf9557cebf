#include "spectator/model.hpp"

#include <cmath>

#include "spectator/numerics.hpp"

namespace spectator {

void SpectatorConfig::set_n1(double n1_target) {
  if (n1_target < 0.0)
    throw Error("validation:bad_value:n1", "n1 must be >= 0");
  lambda1 = std::sqrt(n1_target) * (1.0 - lambda2);
}

void SpectatorConfig::validate() const {
  if (!(beta_s >= 0.0))
    throw Error("validation:bad_value:beta_s", "beta_s must be >= 0");
  if (!(kappa_c > 0.0))
    throw Error("validation:bad_value:kappa_c", "kappa_c must be > 0");
  if (!(kappa_i >= 0.0))
    throw Error("validation:bad_value:kappa_i", "kappa_i must be >= 0");
  if (!(lambda1 >= 0.0))
    throw Error("validation:bad_value:lambda1", "lambda1 must be >= 0");
  if (!(lambda2 >= 0.0) || lambda2 >= 1.0)
    throw Error("validation:bad_value:lambda2",
                "lambda2 must lie in [0, 1): parametric stability");
  if (!(alpha_s >= 0.0))
    throw Error("validation:bad_value:alpha_s", "alpha_s must be >= 0");
  if (!(eta >= 0.0) || eta > 1.0)
    throw Error("validation:bad_value:eta", "eta must lie in [0, 1]");
  if (!(tau_d >= 0.0))
    throw Error("validation:bad_value:tau_d", "tau_d must be >= 0");
  if (lambda1 == 0.0 && alpha_s > 0.0)
    throw Error("validation:bad_value:lambda1",
                "lambda1 = 0 with alpha_s > 0 leaves the transduction "
                "undefined (gamma_ff would be infinite)");
}

double gamma_ff_from_alpha(const SpectatorConfig& c) {
  if (c.alpha_s == 0.0) return 0.0;
  const double kphi = c.kappa_phi();
  const double num = c.alpha_s * kphi;
  return num * num / (64.0 * c.beta_s * c.beta_s * c.n1() * c.kappa_c);
}

double alpha_from_gamma_ff(const SpectatorConfig& c, double gamma_ff) {
  return 8.0 * c.beta_s * std::sqrt(c.n1() * c.kappa_c * gamma_ff) /
         c.kappa_phi();
}

double n2_of_lambda2(double lambda2) {
  return 0.5 * lambda2 * lambda2 / (1.0 - lambda2 * lambda2);
}

double lambda2_of_n2(double n2) {
  if (n2 < 0.0) throw Error("validation:bad_value:n2", "n2 must be >= 0");
  if (n2 == 0.0) return 0.0;
  return bisect_root([n2](double l2) { return n2_of_lambda2(l2) - n2; }, 0.0,
                     1.0 - 1e-16, 1e-12 / (1.0 + 2.0 * n2));
}

DerivedQuantities derive(const SpectatorConfig& c) {
  c.validate();
  DerivedQuantities d;
  d.kappa_tot = c.kappa_tot();
  d.kappa_phi = c.kappa_phi();
  d.kappa_a = c.kappa_a();
  d.n1 = c.n1();
  d.n2 = n2_of_lambda2(c.lambda2);
  d.ncav = d.n1 + d.n2;
  d.gamma_ff = gamma_ff_from_alpha(c);
  d.alpha_s_ideal = d.kappa_tot / c.kappa_c;
  if (c.alpha_s > 0.0) {
    const double back = alpha_from_gamma_ff(c, d.gamma_ff);
    if (std::abs(back - c.alpha_s) > 1e-12 * c.alpha_s)
      throw Error("validation:roundtrip",
                  "alpha_s -> gamma_ff -> alpha_s round trip failed");
  }
  return d;
}

namespace {

// Weight sin^2(w/(2 kc))/w^2 = (1/4) * fid window at t = 1/kc.
SpectralWeight validity_weight(double kappa_c) {
  SpectralWeight w;
  w.shape = [](double) { return 0.25; };
  w.osc_time = 1.0 / kappa_c;
  w.windowed = true;
  w.shape_bound = 0.25;
  return w;
}

}  // namespace

double validity_linear_noise(const SpectatorConfig& c, const SpectralDensity& s,
                             double tol) {
  c.validate();
  const auto q = weighted_integral(s, validity_weight(c.kappa_c), tol);
  if (!q.converged)
    throw Error("convergence:quadrature",
                "weak-noise margin quadrature did not converge (best " +
                    std::to_string(q.value) + ", error " +
                    std::to_string(q.error) + ")");
  return c.beta_s * c.beta_s * q.value;
}

ValidityReport validity_squeezing(const SpectatorConfig& c,
                                  const SpectralDensity& s, double threshold,
                                  double tol) {
  ValidityReport rep;
  rep.threshold = threshold;
  const auto q = weighted_integral(s, validity_weight(c.kappa_c), tol);
  rep.quadrature_converged = q.converged;
  rep.quadrature_error = q.error;
  if (!q.converged)
    throw Error("convergence:quadrature",
                "squeezing-limit quadrature did not converge");
  rep.margin = c.beta_s * c.beta_s * q.value;
  rep.margin_pass = rep.margin < threshold;
  const double rhs = 16.0 * rep.margin;
  rep.squeezing_limit = rhs >= 1.0 ? 0.0 : 1.0 - std::pow(rhs, 0.25);
  const double lhs = std::pow(1.0 - c.lambda2, 4);
  rep.squeezing_pass = lhs >= rhs;
  return rep;
}

ValidityReport validate_config(const SpectatorConfig& c,
                               const SpectralDensity& s, double threshold,
                               double tol) {
  derive(c);  // full invariant check
  return validity_squeezing(c, s, threshold, tol);
}

}  // namespace spectator
