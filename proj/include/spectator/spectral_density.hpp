#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>

namespace spectator {

enum class SpectrumKind { White, Lorentzian, Tabulated };

/// Symmetric, nonnegative classical noise spectrum S[omega].
///
/// Three kinds are supported:
///   white      S[w] = S0
///   lorentzian S[w] = S0 (g^2/4)/(w^2 + g^2/4)
///   tabulated  monotone piecewise-cubic interpolation of samples given on
///              w >= 0 and mirrored to w < 0; held flat at S[w_min] below the
///              lowest grid point (so S[0] stays finite) and zero beyond the
///              highest one.
///
/// All rates are expressed in the unit system of the owning config
/// (kappa_c = 1 by default).
class SpectralDensity {
 public:
  static SpectralDensity white(double s0);
  static SpectralDensity lorentzian(double s0, double gamma);
  /// `omega` strictly increasing, >= 0; `value` >= 0.
  static SpectralDensity tabulated(Eigen::ArrayXd omega, Eigen::ArrayXd value);
  /// Two-column CSV (omega, S[omega]) with one header line.
  static SpectralDensity from_csv(const std::string& path);

  double operator()(double omega) const;

  SpectrumKind kind() const { return kind_; }
  double s0() const { return s0_; }
  double gamma() const { return gamma_; }
  double zero_frequency() const { return (*this)(0.0); }
  bool is_zero() const;

  /// Upper bound on the tail integral  int_W^inf S[w]/w^2 dw  (W > 0).
  double tail_over_omega_sq(double cutoff) const;

  /// Frequency beyond which S is identically zero (infinity if never).
  double support_max() const;

  /// Characteristic frequency scale of the spectrum (0 for white noise).
  double frequency_scale() const;

  /// Heuristic autocorrelation time: inverse of the half-height frequency
  /// (2/gamma for a Lorentzian, 0 for white noise).
  double correlation_time() const;

  std::string describe() const;

 private:
  SpectralDensity() = default;

  SpectrumKind kind_ = SpectrumKind::White;
  double s0_ = 0.0;
  double gamma_ = 0.0;
  // tabulated data on omega >= 0 plus precomputed pchip slopes
  Eigen::ArrayXd grid_;
  Eigen::ArrayXd values_;
  Eigen::ArrayXd slopes_;
};

}  // namespace spectator
