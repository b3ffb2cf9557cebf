#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>

#include "spectator/model.hpp"
#include "spectator/quadrature.hpp"

namespace spectator {

// --- filter functions --------------------------------------------------

/// Free-induction-decay filter  e^{-i w t} - 1.
std::complex<double> filter_fid(double omega, double t);

/// Correlated-noise filter: (1 - eta alpha (kphi/2)/(i w + kphi/2)) Y_fid.
/// A nonzero feedforward delay multiplies alpha by e^{-i w tau_d}.
std::complex<double> filter_correlated(double omega, double t, double alpha_s,
                                       double eta, double kappa_phi,
                                       double tau_d = 0.0);

/// Uncorrelated-noise filter: sqrt(1-eta^2) alpha (kphi/2)/(i w + kphi/2) Y_fid.
std::complex<double> filter_uncorrelated(double omega, double t, double alpha_s,
                                         double eta, double kappa_phi);

struct FilterEvaluation {
  double omega = 0.0;
  double t = 0.0;
  std::complex<double> y;       ///< correlated filter
  std::complex<double> ytilde;  ///< uncorrelated filter
};

FilterEvaluation evaluate_filters(double omega, double t,
                                  const SpectatorConfig& config);

// --- measurement imprecision dephasing ---------------------------------

struct LambdaImpOptions {
  /// With internal loss the decaying transient is normally dropped; this
  /// adds back the lossless-form transient as an approximation.
  bool include_transient_with_loss = false;
};

/// Quantum measurement-imprecision dephasing Lambda_imp(t).
double lambda_imp(double t, const SpectatorConfig& config,
                  const LambdaImpOptions& opts = {});

/// Long-time slope of Lambda_imp.
double lambda_imp_rate(const SpectatorConfig& config);

// --- decoherence function ----------------------------------------------

/// Environmental part of chi(t): the filtered spectral integral without
/// Lambda_imp. Honors config.tau_d through the delayed filter.
/// Throws Error("convergence:...") if the quadrature fails.
double chi_env(double t, const SpectatorConfig& config,
               const SpectralDensity& s, double tol = 1e-8);

/// Full decoherence function chi(t) = chi_env(t) + Lambda_imp(t).
double chi(double t, const SpectatorConfig& config, const SpectralDensity& s,
           double tol = 1e-8);

/// Initial-transient dephasing at ideal transduction (alpha_s = 1):
/// (1/2) int dw/2pi S[w] |Y_fid|^2 / (w^2 + kphi^2/4).
double chi_init(double t, double kappa_phi, const SpectralDensity& s,
                double tol = 1e-8);

/// Long-time dephasing rate: (1/2)(alpha^2 - 2 eta alpha + 1) S[0] plus the
/// Lambda_imp slope.
double long_time_rate(const SpectatorConfig& config, const SpectralDensity& s);

// --- feedforward delay (white-noise closed forms) -----------------------

/// Environmental part of chi(t) under a feedforward delay tau_d, white noise.
double chi_delay_env(double t, double tau_d, double kappa_phi, double s0);

/// chi_delay_env + Lambda_imp. The spectrum must be white.
double chi_delay(double t, double tau_d, const SpectatorConfig& config,
                 const SpectralDensity& s);

/// Earliest time at which the delayed spectator curve beats bare dephasing
/// S0 t / 2 (Lambda_imp neglected). Returns 0 when tau_d = 0.
double break_even_time(const SpectatorConfig& config, const SpectralDensity& s,
                       double tau_d);

// --- curves --------------------------------------------------------------

struct CoherenceCurve {
  Eigen::ArrayXd t;
  Eigen::ArrayXd chi_env;
  Eigen::ArrayXd lambda_imp;
  Eigen::ArrayXd chi_total;   ///< chi_env + lambda_imp, exactly
  Eigen::ArrayXd coherence;   ///< exp(-chi_total)
  SpectatorConfig config;
  std::string spectrum;
  double validity_margin = 0.0;
};

Eigen::ArrayXd log_grid(double t_min, double t_max, int points);

/// Evaluates the curve over the grid; pure per-point work parallelized over
/// `threads` workers (0 = hardware concurrency) with results independent of
/// the worker count. Warns on stderr when the weak-noise gate is marginal.
CoherenceCurve make_curve(const SpectatorConfig& config,
                          const SpectralDensity& s, const Eigen::ArrayXd& t,
                          double tol = 1e-8, int threads = 0,
                          double validity_threshold = 0.05);

}  // namespace spectator
