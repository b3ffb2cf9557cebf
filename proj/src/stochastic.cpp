#include "spectator/stochastic.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>
#include <vector>

#include "spectator/numerics.hpp"
#include "spectator/quadrature.hpp"

namespace spectator {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

// One real stationary series with spectral density S, via Hermitian
// frequency-domain synthesis.
Eigen::ArrayXd synthesize_series(const SpectralDensity& s, double dt,
                                 Eigen::Index n_fft, Eigen::Index n_out,
                                 Rng& rng, Eigen::FFT<double>& fft) {
  const double d_omega = kTwoPi / (static_cast<double>(n_fft) * dt);
  std::vector<std::complex<double>> spec(n_fft, {0.0, 0.0});
  const auto sigma = [&](Eigen::Index k) {
    return std::sqrt(s(k * d_omega) * d_omega / kTwoPi);
  };
  spec[0] = sigma(0) * rng.next_normal();
  for (Eigen::Index k = 1; k < n_fft / 2; ++k) {
    const double amp = sigma(k) / std::sqrt(2.0);
    const std::complex<double> c(amp * rng.next_normal(),
                                 amp * rng.next_normal());
    spec[k] = c;
    spec[n_fft - k] = std::conj(c);
  }
  spec[n_fft / 2] = sigma(n_fft / 2) * rng.next_normal();

  std::vector<std::complex<double>> series;
  fft.inv(series, spec);
  Eigen::ArrayXd out(n_out);
  for (Eigen::Index i = 0; i < n_out; ++i)
    out[i] = series[i].real() * static_cast<double>(n_fft);
  return out;
}

}  // namespace

NoiseRealization synthesize(const SpectralDensity& s, double eta, double dt,
                            Eigen::Index n_samples, std::uint64_t seed,
                            const SynthesisOptions& options) {
  if (!(dt > 0.0) || n_samples < 2)
    throw Error("validation:bad_value:sampling",
                "synthesize needs dt > 0 and n_samples >= 2");
  if (eta < 0.0 || eta > 1.0)
    throw Error("validation:bad_value:eta", "eta must lie in [0, 1]");
  const double s_nyquist = s(kTwoPi / (2.0 * dt));
  const double s_zero = s.zero_frequency();
  if (!options.allow_aliasing && s_zero > 0.0 &&
      !(s_nyquist < 1e-3 * s_zero))
    throw Error("validation:aliasing",
                "dt does not resolve the spectrum: S[pi/dt] = " +
                    std::to_string(s_nyquist) + " vs 1e-3 S[0] = " +
                    std::to_string(1e-3 * s_zero));
  const Eigen::Index n_fft = next_pow2(n_samples);
  if (n_fft > (Eigen::Index(1) << 26))
    throw Error("validation:length_overflow",
                "requested noise series is too long (n_fft = " +
                    std::to_string(n_fft) + ")");

  NoiseRealization noise;
  noise.dt = dt;
  noise.seed = seed;
  noise.eta = eta;
  noise.spectrum = s.describe();

  Eigen::FFT<double> fft;
  std::uint64_t root = seed;
  Rng rng_q(splitmix64(root));
  Rng rng_p(splitmix64(root));
  noise.xi_q = synthesize_series(s, dt, n_fft, n_samples, rng_q, fft);
  if (eta == 1.0) {
    noise.xi_s = noise.xi_q;
  } else {
    const Eigen::ArrayXd indep =
        synthesize_series(s, dt, n_fft, n_samples, rng_p, fft);
    noise.xi_s = eta * noise.xi_q + std::sqrt(1.0 - eta * eta) * indep;
  }
  return noise;
}

GaussianTrajectory integrate(const NoiseRealization& noise,
                             const SpectatorConfig& cfg, int epsilon,
                             const Eigen::ArrayXd& out_times,
                             const IntegrationOptions& options) {
  cfg.validate();
  if (cfg.kappa_i != 0.0)
    throw Error("validation:bad_value:kappa_i",
                "the trajectory integrator covers kappa_i = 0 only");
  if (epsilon != 0 && epsilon != 1)
    throw Error("validation:bad_value:epsilon", "epsilon must be 0 or 1");

  const double kc = cfg.kappa_c;
  const double kphi = cfg.kappa_phi();
  const double ka = cfg.kappa_a();
  const double beta = cfg.beta_s;
  const double gamma_ff = gamma_ff_from_alpha(cfg);
  const double g2 = std::sqrt(2.0 * kc * gamma_ff);
  const double drive = std::sqrt(2.0 * cfg.n1()) * beta;
  const double eps = static_cast<double>(epsilon);

  double h = options.max_step > 0.0 ? options.max_step
                                    : std::min(noise.dt, 1.0 / (40.0 * kphi));
  // make the step divide the noise sample spacing so t = 0 sits on the lattice
  const int per_sample = static_cast<int>(std::ceil(noise.dt / h - 1e-12));
  h = noise.dt / per_sample;

  const double t_start = noise.t_start();
  const double t_last =
      t_start + noise.dt * static_cast<double>(noise.n_samples() - 1);
  const double t_end = out_times.size() ? out_times.maxCoeff() : 0.0;
  if (t_end > t_last + 1e-9 * noise.dt)
    throw Error("validation:length_overflow",
                "noise series does not cover the requested evolution time");

  const long n_steps = std::lround((t_end - t_start) / h);

  // output bookkeeping: snap each requested time to the nearest step index
  const Eigen::Index n_out = out_times.size();
  std::vector<std::pair<long, Eigen::Index>> schedule(n_out);
  for (Eigen::Index i = 0; i < n_out; ++i) {
    if (out_times[i] < 0.0)
      throw Error("validation:bad_value:time_grid",
                  "output times must be >= 0");
    schedule[i] = {std::lround((out_times[i] - t_start) / h), i};
  }
  std::sort(schedule.begin(), schedule.end());

  GaussianTrajectory traj;
  traj.epsilon = epsilon;
  traj.step = h;
  traj.t.resize(n_out);
  traj.nu.resize(n_out);
  traj.xbar.resize(n_out);
  traj.pbar.resize(n_out);
  traj.sigma_x.resize(n_out);
  traj.sigma_p.resize(n_out);
  traj.sigma_xp.resize(n_out);

  const double* xq = noise.xi_q.data();
  const double* xs = noise.xi_s.data();
  const Eigen::Index last_idx = noise.n_samples() - 1;
  const double inv_dt = 1.0 / noise.dt;
  const auto interp = [&](const double* series, double t) {
    double u = (t - t_start) * inv_dt;
    if (u <= 0.0) return series[0];
    Eigen::Index i = static_cast<Eigen::Index>(u);
    if (i >= last_idx) return series[last_idx];
    const double frac = u - static_cast<double>(i);
    return series[i] * (1.0 - frac) + series[i + 1] * frac;
  };

  using cplx = std::complex<double>;
  struct State {
    cplx nu, x, p;
    double sx, sp, sxp;
  };
  // analytic steady state of the undriven covariances; means start at zero
  State y{cplx{0, 0}, cplx{0, 0}, cplx{0, 0}, kc / (2.0 * ka),
          kc / (2.0 * kphi), 0.0};

  // `on` gates the t = 0 turn-on per integration step (steps never straddle
  // t = 0, so gating by the step start keeps the quadrature of theta(t)
  // terms exact)
  const auto rhs = [&](double t, double on, const State& s_in) {
    State d;
    const double xi_q = interp(xq, t);
    const double xi_s = interp(xs, t);
    const double eb = eps * beta * xi_s;
    d.nu = on * (cplx{xi_q, -2.0 * gamma_ff} - 2.0 * g2 * s_in.p);
    d.x = -0.5 * ka * s_in.x + eb * s_in.p +
          on * cplx{0.0, 2.0 * g2 * s_in.sxp};
    d.p = -0.5 * kphi * s_in.p - eb * s_in.x + drive * xi_s +
          on * cplx{0.0, g2 * (2.0 * s_in.sp - 1.0)};
    d.sx = -ka * s_in.sx + 0.5 * kc + 2.0 * eb * s_in.sxp;
    d.sp = -kphi * s_in.sp + 0.5 * kc - 2.0 * eb * s_in.sxp;
    d.sxp = -kc * s_in.sxp + eb * (s_in.sp - s_in.sx);
    return d;
  };
  const auto axpy = [](const State& a, double w, const State& b) {
    return State{a.nu + w * b.nu, a.x + w * b.x,     a.p + w * b.p,
                 a.sx + w * b.sx, a.sp + w * b.sp,   a.sxp + w * b.sxp};
  };

  size_t cursor = 0;
  const auto record = [&](long step_index) {
    while (cursor < schedule.size() && schedule[cursor].first == step_index) {
      const Eigen::Index slot = schedule[cursor].second;
      traj.t[slot] = t_start + h * static_cast<double>(step_index);
      traj.nu[slot] = y.nu;
      traj.xbar[slot] = y.x;
      traj.pbar[slot] = y.p;
      traj.sigma_x[slot] = y.sx;
      traj.sigma_p[slot] = y.sp;
      traj.sigma_xp[slot] = y.sxp;
      ++cursor;
    }
  };

  record(0);
  for (long j = 0; j < n_steps; ++j) {
    const double t = t_start + h * static_cast<double>(j);
    const double on = t >= 0.0 ? 1.0 : 0.0;
    const State k1 = rhs(t, on, y);
    const State k2 = rhs(t + 0.5 * h, on, axpy(y, 0.5 * h, k1));
    const State k3 = rhs(t + 0.5 * h, on, axpy(y, 0.5 * h, k2));
    const State k4 = rhs(t + h, on, axpy(y, h, k3));
    y.nu += h / 6.0 * (k1.nu + 2.0 * k2.nu + 2.0 * k3.nu + k4.nu);
    y.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    y.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    y.sx += h / 6.0 * (k1.sx + 2.0 * k2.sx + 2.0 * k3.sx + k4.sx);
    y.sp += h / 6.0 * (k1.sp + 2.0 * k2.sp + 2.0 * k3.sp + k4.sp);
    y.sxp += h / 6.0 * (k1.sxp + 2.0 * k2.sxp + 2.0 * k3.sxp + k4.sxp);
    if (!(std::abs(y.sx) < options.sigma_abort) ||
        !(std::abs(y.sp) < options.sigma_abort) || !std::isfinite(y.nu.real()))
      throw Error("convergence:instability",
                  "trajectory integration unstable at t = " +
                      std::to_string(t + h) +
                      " (covariances exceeded the abort bound)");
    record(j + 1);
  }
  return traj;
}

EnsembleChi ensemble_chi(const SpectralDensity& s, const SpectatorConfig& cfg,
                         int epsilon, int n_realizations,
                         std::uint64_t master_seed,
                         const Eigen::ArrayXd& t_grid, int threads) {
  derive(cfg);
  if (n_realizations < 100)
    throw Error("validation:bad_value:realizations",
                "ensemble_chi needs at least 100 realizations");
  if (t_grid.size() == 0 || t_grid.minCoeff() < 0.0)
    throw Error("validation:bad_value:time_grid",
                "ensemble grid must be nonempty and nonnegative");

  const double kphi = cfg.kappa_phi();
  const double h0 = 1.0 / (40.0 * kphi);
  SynthesisOptions synth_opts;
  double dt;
  if (s.kind() == SpectrumKind::White || s.is_zero()) {
    // White noise has no resolving dt; band-limit it at half the step scale
    // (the linearly interpolated series carries S0 (t - dt/2) of FID phase
    // variance over a window t, so dt must sit well below the first grid
    // time).
    dt = 0.5 * h0;
    synth_opts.allow_aliasing = true;
  } else {
    // The sampling must resolve both the spectrum (aliasing rule) and the
    // integrator step: a coarser dt biases the interpolated autocovariance
    // near its |tau| cusp by O(dt^2).
    double w_hi = std::max(s.frequency_scale(), kphi);
    const double s0 = s.zero_frequency();
    while (s(w_hi) >= 1e-3 * s0 && w_hi < 1e12) w_hi *= 2.0;
    dt = std::min(h0, kTwoPi / (2.0 * w_hi));
  }
  const double h = dt / std::ceil(dt / h0 - 1e-12);

  const double preroll_target =
      10.0 * std::max(1.0 / kphi, s.correlation_time());
  const Eigen::Index preroll_samples =
      static_cast<Eigen::Index>(std::ceil(preroll_target / dt));
  const double t_end = t_grid.maxCoeff();
  const Eigen::Index n_samples =
      preroll_samples + static_cast<Eigen::Index>(std::ceil(t_end / dt)) + 2;

  // evaluation times snapped to the integration lattice
  Eigen::ArrayXd t_snap(t_grid.size());
  for (Eigen::Index i = 0; i < t_grid.size(); ++i)
    t_snap[i] = h * std::round(t_grid[i] / h);

  const Eigen::Index n_t = t_snap.size();
  const int n = n_realizations;
  Eigen::ArrayXXcd z(n, n_t);

  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));

  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto task = [&](int worker) {
    try {
      for (int i = worker; i < n; i += workers) {
        NoiseRealization noise =
            synthesize(s, cfg.eta, dt, n_samples,
                       substream_seed(master_seed, i), synth_opts);
        noise.preroll_samples = preroll_samples;
        const GaussianTrajectory traj = integrate(noise, cfg, epsilon, t_snap);
        for (Eigen::Index k = 0; k < n_t; ++k) {
          const double phi = traj.nu[k].real();
          z(i, k) = std::complex<double>(std::cos(phi), std::sin(phi));
        }
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
    for (int w = 0; w < workers; ++w) pool.emplace_back(task, w);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleChi out;
  out.t = t_snap;
  out.chi.resize(n_t);
  out.std_error.resize(n_t);
  out.resolvable.resize(n_t);
  out.dt = dt;
  out.step = h;
  out.preroll = dt * static_cast<double>(preroll_samples);
  out.n_realizations = n;
  out.master_seed = master_seed;

  for (Eigen::Index k = 0; k < n_t; ++k) {
    std::complex<double> sum{0.0, 0.0};
    for (int i = 0; i < n; ++i) sum += z(i, k);  // fixed order
    const double mean_abs = std::abs(sum) / n;
    out.chi[k] = -std::log(mean_abs);
    // jackknife over realizations
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double loo = -std::log(std::abs(sum - z(i, k)) / (n - 1));
      acc += loo;
      acc2 += loo * loo;
    }
    const double mean_loo = acc / n;
    const double var_loo = std::max(0.0, acc2 / n - mean_loo * mean_loo);
    out.std_error[k] = std::sqrt(static_cast<double>(n - 1) * var_loo);
    // -ln|mean| saturates near ln sqrt(n), so pair the chi > ~5 cutoff with
    // a jackknife-error cutoff to catch small ensembles at the noise floor
    out.resolvable[k] = out.chi[k] < 5.0 && out.std_error[k] < 0.3;
  }
  return out;
}

ResidualEstimate residual_rate_estimate(const SpectatorConfig& cfg,
                                        const SpectralDensity& s, double tol) {
  const double margin = validity_linear_noise(cfg, s, tol);
  if (margin >= 1.0)
    throw Error("validation:bad_value:margin",
                "residual estimate requires the weak-noise margin < 1");
  ResidualEstimate est;
  est.ratio = 4.0 * margin;  // |Y_fid|^2 = 4 sin^2
  est.gamma_res = 0.5 * est.ratio * s.zero_frequency();
  est.alpha_renorm = cfg.alpha_s * (1.0 - 0.5 * est.ratio);
  return est;
}

}  // namespace spectator
