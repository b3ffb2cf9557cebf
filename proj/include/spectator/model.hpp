#pragma once

#include <string>

#include "spectator/quadrature.hpp"
#include "spectator/spectral_density.hpp"

namespace spectator {

/// Physical parameters of one spectator-mode + qubit setup.
///
/// alpha_s is the stored control knob; the feedforward rate gamma_ff is
/// always derived from it. All rates are in units of kappa_c unless the
/// config was ingested with units = "absolute" (converted on ingestion, the
/// original scale kept in `kappa_c_absolute`).
struct SpectatorConfig {
  double beta_s = 1.0;    ///< dimensionless noise coupling, >= 0
  double kappa_c = 1.0;   ///< waveguide coupling rate (global rate scale)
  double kappa_i = 0.0;   ///< internal loss rate, >= 0
  double lambda1 = 0.0;   ///< linear drive strength, >= 0
  double lambda2 = 0.0;   ///< parametric drive strength, in [0, 1)
  double alpha_s = 0.0;   ///< transduction factor, >= 0
  double eta = 1.0;       ///< noise correlation, in [0, 1]
  double tau_d = 0.0;     ///< feedforward delay, >= 0
  double kappa_c_absolute = 0.0;  ///< 0 unless ingested in absolute units

  double kappa_tot() const { return kappa_c + kappa_i; }
  double kappa_phi() const { return (1.0 + lambda2) * kappa_tot(); }
  double kappa_a() const { return (1.0 - lambda2) * kappa_tot(); }
  double n1() const {
    const double d = 1.0 - lambda2;
    return lambda1 * lambda1 / (d * d);
  }

  /// Convenience: set lambda1 so that the displacement photon number is n1.
  void set_n1(double n1_target);

  /// Throws Error("validation:...") on any violated invariant.
  void validate() const;
};

struct DerivedQuantities {
  double kappa_phi = 0.0;
  double kappa_a = 0.0;
  double kappa_tot = 0.0;
  double n1 = 0.0;        ///< displacement photon number
  double n2 = 0.0;        ///< intracavity squeezing photon number
  double ncav = 0.0;      ///< n1 + n2
  double gamma_ff = 0.0;  ///< feedforward rate recovered from alpha_s
  double alpha_s_ideal = 0.0;  ///< kappa_tot / kappa_c
};

/// Populates every derived field and checks the alpha_s round trip:
/// reconstructing alpha_s from (beta_s, kappa_phi, n1, kappa_c, gamma_ff)
/// must reproduce the stored value to 1e-12 relative.
DerivedQuantities derive(const SpectatorConfig& config);

double gamma_ff_from_alpha(const SpectatorConfig& config);
double alpha_from_gamma_ff(const SpectatorConfig& config, double gamma_ff);

/// Intracavity squeezing photon number for a parametric drive strength.
double n2_of_lambda2(double lambda2);
/// Inverse of n2_of_lambda2 on [0, 1), solved by bisection to 1e-12.
double lambda2_of_n2(double n2);

struct ValidityReport {
  double margin = 0.0;      ///< weak-noise margin (pass when << 1)
  double threshold = 0.05;  ///< configurable pass threshold for `margin`
  bool margin_pass = false;
  double squeezing_limit = 0.0;  ///< maximal admissible lambda2
  bool squeezing_pass = false;   ///< config's lambda2 within the limit
  bool quadrature_converged = true;
  double quadrature_error = 0.0;
};

/// Weak-noise margin M = beta_s^2 int dw/2pi S[w]/w^2 sin^2(w/(2 kappa_c)).
/// The caller treats M below `threshold` (default 0.05) as a pass.
double validity_linear_noise(const SpectatorConfig& config,
                             const SpectralDensity& s, double tol = 1e-8);

/// Squeezing admissibility: (1-lambda2)^4 >= 16 M. Returns the maximal
/// admissible lambda2 and whether the config's lambda2 satisfies it.
ValidityReport validity_squeezing(const SpectatorConfig& config,
                                  const SpectralDensity& s,
                                  double threshold = 0.05, double tol = 1e-8);

/// Both gates in one report (used by the CLI `validate` command).
ValidityReport validate_config(const SpectatorConfig& config,
                               const SpectralDensity& s,
                               double threshold = 0.05, double tol = 1e-8);

}  // namespace spectator
