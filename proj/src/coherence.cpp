#include "spectator/coherence.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "spectator/numerics.hpp"

namespace spectator {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};

double env_k_factor(double alpha, double eta) {
  return alpha * alpha - 2.0 * eta * alpha + 1.0;
}

// Shape factor of the environmental integrand:
//   [ |Y|^2 + |Ytilde|^2 ] / |Y_fid|^2  =  (w^2 + c^2 K) / (w^2 + c^2)
// with c = kphi/2; the delayed filter replaces the numerator by
//   (c - eta alpha c cos w tau)^2 + (w + eta alpha c sin w tau)^2
//   + (1 - eta^2) alpha^2 c^2.
SpectralWeight env_weight(double t, const SpectatorConfig& cfg) {
  const double c = 0.5 * cfg.kappa_phi();
  const double a = cfg.alpha_s;
  const double eta = cfg.eta;
  const double tau = cfg.tau_d;
  SpectralWeight w;
  w.osc_time = t;
  w.windowed = true;
  w.shape_scale = 2.0 * c;
  if (tau == 0.0) {
    const double k = env_k_factor(a, eta);
    w.shape = [c, k](double x) {
      const double x2 = x * x;
      return (x2 + c * c * k) / (x2 + c * c);
    };
    w.shape_bound = std::max(1.0, k);
  } else {
    const double ea = eta * a;
    const double u2 = (1.0 - eta * eta) * a * a * c * c;
    w.shape = [c, ea, u2, tau](double x) {
      const double re = c - ea * c * std::cos(x * tau);
      const double im = x + ea * c * std::sin(x * tau);
      return (re * re + im * im + u2) / (x * x + c * c);
    };
    w.shape_bound = 2.0 + (1.0 + ea) * (1.0 + ea) + 2.0 * a * a;
  }
  return w;
}

double quadrature_or_throw(const SpectralDensity& s, const SpectralWeight& w,
                           double tol, const char* what) {
  const auto q = weighted_integral(s, w, tol);
  if (!q.converged)
    throw Error("convergence:quadrature",
                std::string(what) + ": quadrature did not converge (best " +
                    std::to_string(q.value) + ", error estimate " +
                    std::to_string(q.error) + ")");
  return q.value;
}

}  // namespace

std::complex<double> filter_fid(double omega, double t) {
  return std::exp(-kI * omega * t) - 1.0;
}

std::complex<double> filter_correlated(double omega, double t, double alpha_s,
                                       double eta, double kappa_phi,
                                       double tau_d) {
  const double c = 0.5 * kappa_phi;
  std::complex<double> alpha = alpha_s;
  if (tau_d > 0.0) alpha *= std::exp(-kI * omega * tau_d);
  return (1.0 - eta * alpha * c / (kI * omega + c)) * filter_fid(omega, t);
}

std::complex<double> filter_uncorrelated(double omega, double t, double alpha_s,
                                         double eta, double kappa_phi) {
  const double c = 0.5 * kappa_phi;
  return std::sqrt(1.0 - eta * eta) * alpha_s * c / (kI * omega + c) *
         filter_fid(omega, t);
}

FilterEvaluation evaluate_filters(double omega, double t,
                                  const SpectatorConfig& cfg) {
  FilterEvaluation f;
  f.omega = omega;
  f.t = t;
  f.y = filter_correlated(omega, t, cfg.alpha_s, cfg.eta, cfg.kappa_phi(),
                          cfg.tau_d);
  f.ytilde =
      filter_uncorrelated(omega, t, cfg.alpha_s, cfg.eta, cfg.kappa_phi());
  return f;
}

double lambda_imp(double t, const SpectatorConfig& cfg,
                  const LambdaImpOptions& opts) {
  if (cfg.alpha_s == 0.0) return 0.0;
  const double n1 = cfg.n1();
  if (n1 == 0.0)
    throw Error("validation:bad_value:lambda1",
                "Lambda_imp undefined for n1 = 0 with alpha_s > 0");
  const double pref =
      cfg.alpha_s * cfg.alpha_s / (32.0 * cfg.beta_s * cfg.beta_s * n1);
  const double l2 = cfg.lambda2;
  const double kphi = cfg.kappa_phi();
  const double transient =
      8.0 * l2 * (1.0 - std::exp(-0.5 * kphi * t)) / (1.0 + l2);
  if (cfg.kappa_i == 0.0)
    return pref * ((1.0 - l2) * (1.0 - l2) * kphi * t / (1.0 + l2) + transient);
  const double loss_ratio = cfg.kappa_i / cfg.kappa_c;
  double out = pref * (cfg.kappa_c / cfg.kappa_tot()) *
               ((1.0 - l2) * (1.0 - l2) / (1.0 + l2) +
                loss_ratio * (1.0 + l2)) *
               kphi * t;
  if (opts.include_transient_with_loss) out += pref * transient;
  return out;
}

double lambda_imp_rate(const SpectatorConfig& cfg) {
  if (cfg.alpha_s == 0.0) return 0.0;
  const double n1 = cfg.n1();
  if (n1 == 0.0)
    throw Error("validation:bad_value:lambda1",
                "Lambda_imp undefined for n1 = 0 with alpha_s > 0");
  const double pref =
      cfg.alpha_s * cfg.alpha_s / (32.0 * cfg.beta_s * cfg.beta_s * n1);
  const double l2 = cfg.lambda2;
  const double kphi = cfg.kappa_phi();
  if (cfg.kappa_i == 0.0)
    return pref * (1.0 - l2) * (1.0 - l2) * kphi / (1.0 + l2);
  const double loss_ratio = cfg.kappa_i / cfg.kappa_c;
  return pref * (cfg.kappa_c / cfg.kappa_tot()) *
         ((1.0 - l2) * (1.0 - l2) / (1.0 + l2) + loss_ratio * (1.0 + l2)) *
         kphi;
}

double chi_env(double t, const SpectatorConfig& cfg, const SpectralDensity& s,
               double tol) {
  if (t == 0.0) return 0.0;
  return 0.5 * quadrature_or_throw(s, env_weight(t, cfg), tol, "chi_env");
}

double chi(double t, const SpectatorConfig& cfg, const SpectralDensity& s,
           double tol) {
  return chi_env(t, cfg, s, tol) + lambda_imp(t, cfg);
}

double chi_init(double t, double kappa_phi, const SpectralDensity& s,
                double tol) {
  if (t == 0.0) return 0.0;
  const double c = 0.5 * kappa_phi;
  SpectralWeight w;
  w.osc_time = t;
  w.windowed = true;
  w.shape = [c](double x) { return x * x / (x * x + c * c); };
  w.shape_bound = 1.0;
  w.shape_scale = kappa_phi;
  return 0.5 * quadrature_or_throw(s, w, tol, "chi_init");
}

double long_time_rate(const SpectatorConfig& cfg, const SpectralDensity& s) {
  const double k = env_k_factor(cfg.alpha_s, cfg.eta);
  return 0.5 * k * s.zero_frequency() + lambda_imp_rate(cfg);
}

double chi_delay_env(double t, double tau_d, double kappa_phi, double s0) {
  const double c = 0.5 * kappa_phi;
  if (t <= tau_d) return s0 * t + s0 / kappa_phi * (std::exp(-c * t) - 1.0);
  return s0 * tau_d +
         s0 / kappa_phi *
             (1.0 - 2.0 * std::exp(-c * (t - tau_d)) + std::exp(-c * t));
}

double chi_delay(double t, double tau_d, const SpectatorConfig& cfg,
                 const SpectralDensity& s) {
  if (s.kind() != SpectrumKind::White)
    throw Error("validation:bad_value:spectrum",
                "chi_delay closed form requires white noise; use chi() with "
                "config.tau_d for general spectra");
  return chi_delay_env(t, tau_d, cfg.kappa_phi(), s.s0()) +
         lambda_imp(t, cfg);
}

double break_even_time(const SpectatorConfig& cfg, const SpectralDensity& s,
                       double tau_d) {
  if (s.kind() != SpectrumKind::White)
    throw Error("validation:bad_value:spectrum",
                "break_even_time requires white noise");
  if (tau_d == 0.0) return 0.0;  // delayed curve never exceeds the bare one
  const double kphi = cfg.kappa_phi();
  const double s0 = s.s0();
  if (s0 == 0.0)
    throw Error("convergence:no_crossing",
                "break-even undefined for a zero spectrum");
  const auto excess = [&](double t) {
    return chi_delay_env(t, tau_d, kphi, s0) - 0.5 * s0 * t;
  };
  double hi = 2.0 * (tau_d + 1.0 / kphi);
  int guard = 0;
  while (excess(hi) > 0.0 && guard++ < 200) hi *= 1.5;
  if (excess(hi) > 0.0)
    throw Error("convergence:no_crossing",
                "delayed curve never crosses the bare dephasing line");
  return bisect_root(excess, tau_d, hi, 1e-10 / kphi);
}

Eigen::ArrayXd log_grid(double t_min, double t_max, int points) {
  if (!(t_min > 0.0) || !(t_max > t_min) || points < 2)
    throw Error("validation:bad_value:time_grid",
                "log grid needs 0 < t_min < t_max and >= 2 points");
  Eigen::ArrayXd g(points);
  const double step = std::log(t_max / t_min) / (points - 1);
  for (int i = 0; i < points; ++i) g[i] = t_min * std::exp(step * i);
  return g;
}

CoherenceCurve make_curve(const SpectatorConfig& cfg, const SpectralDensity& s,
                          const Eigen::ArrayXd& t, double tol, int threads,
                          double validity_threshold) {
  derive(cfg);
  CoherenceCurve curve;
  curve.t = t;
  curve.config = cfg;
  curve.spectrum = s.describe();
  curve.validity_margin = validity_linear_noise(cfg, s, tol);
  if (curve.validity_margin >= validity_threshold)
    std::cerr << "warning: weak-noise margin " << curve.validity_margin
              << " exceeds threshold " << validity_threshold
              << "; linear-noise results are marginal\n";

  const Eigen::Index n = t.size();
  curve.chi_env.resize(n);
  curve.lambda_imp.resize(n);
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));

  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto task = [&](int worker) {
    try {
      for (Eigen::Index i = worker; i < n; i += workers) {
        curve.chi_env[i] = chi_env(t[i], cfg, s, tol);
        curve.lambda_imp[i] = lambda_imp(t[i], cfg);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  if (workers == 1) {
    task(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int k = 0; k < workers; ++k) pool.emplace_back(task, k);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  curve.chi_total = curve.chi_env + curve.lambda_imp;
  curve.coherence = (-curve.chi_total).exp();
  return curve;
}

}  // namespace spectator
