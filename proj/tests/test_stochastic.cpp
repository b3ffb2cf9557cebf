#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "spectator/coherence.hpp"
#include "spectator/numerics.hpp"
#include "spectator/stochastic.hpp"

using namespace spectator;

namespace {

SpectatorConfig make_config(double beta, double n1, double lambda2,
                            double alpha, double eta = 1.0) {
  SpectatorConfig c;
  c.beta_s = beta;
  c.lambda2 = lambda2;
  c.alpha_s = alpha;
  c.eta = eta;
  c.set_n1(n1);
  return c;
}

double mean_of(const Eigen::ArrayXd& v) { return v.mean(); }

double stderr_of(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  double m = 0.0;
  for (double x : xs) m += x;
  m /= n;
  double var = 0.0;
  for (double x : xs) var += (x - m) * (x - m);
  var /= (n - 1);
  return std::sqrt(var / n);
}

}  // namespace

TEST_CASE("synthesize: perfect correlation duplicates the series") {
  const auto s = SpectralDensity::lorentzian(0.1, 1.0);
  const auto noise = synthesize(s, 1.0, 0.1, 4096, 77);
  CHECK((noise.xi_q == noise.xi_s).all());
}

TEST_CASE("synthesize: aliasing and length guards") {
  const auto s = SpectralDensity::lorentzian(0.1, 1.0);
  // dt = 1.0 leaves S[pi/dt]/S[0] ~ 2.5e-2: rejected
  CHECK_THROWS_AS(synthesize(s, 1.0, 1.0, 1024, 1), Error);
  // dt = 0.1 resolves it (pi/dt ~ 31 -> ratio ~ 2.5e-4)
  CHECK_NOTHROW(synthesize(s, 1.0, 0.1, 1024, 1));
  // white noise requires the explicit override
  const auto w = SpectralDensity::white(0.1);
  CHECK_THROWS_AS(synthesize(w, 1.0, 0.1, 1024, 1), Error);
  SynthesisOptions allow;
  allow.allow_aliasing = true;
  CHECK_NOTHROW(synthesize(w, 1.0, 0.1, 1024, 1, allow));
  CHECK_THROWS_AS(synthesize(s, 1.0, 0.1, (Eigen::Index(1) << 27), 1), Error);
}

TEST_CASE("synthesize: ensemble statistics match the target spectrum") {
  const double s0 = 0.4, gamma = 1.0, eta = 0.6, dt = 0.1;
  const auto s = SpectralDensity::lorentzian(s0, gamma);
  const int realizations = 300;
  const Eigen::Index n = 4096;
  const double c0 = s0 * gamma / 4.0;  // autocorrelation C(0)

  std::vector<double> means, cross, auto0, auto1, auto4;
  const Eigen::Index lag1 = static_cast<Eigen::Index>(std::lround(1.0 / dt));
  const Eigen::Index lag4 = static_cast<Eigen::Index>(std::lround(4.0 / dt));
  for (int r = 0; r < realizations; ++r) {
    const auto noise = synthesize(s, eta, dt, n, substream_seed(2024, r));
    means.push_back(mean_of(noise.xi_q));
    cross.push_back((noise.xi_q * noise.xi_s).mean());
    auto0.push_back((noise.xi_q * noise.xi_q).mean());
    auto1.push_back(
        (noise.xi_q.head(n - lag1) * noise.xi_q.tail(n - lag1)).mean());
    auto4.push_back(
        (noise.xi_q.head(n - lag4) * noise.xi_q.tail(n - lag4)).mean());
  }
  const auto grand = [](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    return m / xs.size();
  };
  CHECK(std::abs(grand(means)) < 5.0 * stderr_of(means));
  CHECK(std::abs(grand(cross) - eta * c0) < 5.0 * stderr_of(cross));
  CHECK(std::abs(grand(auto0) - c0) < 5.0 * stderr_of(auto0));
  CHECK(std::abs(grand(auto1) - c0 * std::exp(-0.5 * gamma * 1.0)) <
        5.0 * stderr_of(auto1));
  CHECK(std::abs(grand(auto4) - c0 * std::exp(-0.5 * gamma * 4.0)) <
        5.0 * stderr_of(auto4));
}

TEST_CASE("synthesize: uncorrelated sources decorrelate") {
  const auto s = SpectralDensity::lorentzian(0.4, 1.0);
  const int realizations = 200;
  std::vector<double> cross;
  for (int r = 0; r < realizations; ++r) {
    const auto noise = synthesize(s, 0.0, 0.1, 2048, substream_seed(99, r));
    cross.push_back((noise.xi_q * noise.xi_s).mean());
  }
  double m = 0.0;
  for (double x : cross) m += x;
  m /= realizations;
  CHECK(std::abs(m) < 5.0 * stderr_of(cross));
}

TEST_CASE("integrate: quiet noise leaves only the feedforward backaction") {
  const auto cfg = make_config(1.0, 30.0, 0.0, 1.0);
  const double gff = gamma_ff_from_alpha(cfg);
  const auto s = SpectralDensity::white(0.0);
  SynthesisOptions allow;
  allow.allow_aliasing = true;
  auto noise = synthesize(s, 1.0, 0.025, 4096, 3, allow);
  noise.preroll_samples = 400;
  Eigen::ArrayXd out(3);
  out << 0.0, 10.0, 60.0;
  for (int eps : {0, 1}) {
    const auto traj = integrate(noise, cfg, eps, out);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      CHECK(std::abs(traj.nu[i].real()) < 1e-12);
      CHECK(-traj.nu[i].imag() ==
            doctest::Approx(2.0 * gff * traj.t[i]).epsilon(1e-10));
      CHECK(traj.sigma_p[i] == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(traj.sigma_x[i] == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
}

TEST_CASE("integrate: linear-drive phase matches the exact convolution") {
  const auto cfg = make_config(1.0, 30.0, 0.0, 1.0);
  const double kphi = cfg.kappa_phi();
  const auto s = SpectralDensity::lorentzian(0.2, 1.0);
  const double dt = 0.05;
  const Eigen::Index n = 2048;
  auto noise = synthesize(s, 1.0, dt, n, 88);
  noise.preroll_samples = 400;  // 20 time units
  const double t_end = 6.0;
  Eigen::ArrayXd out(1);
  out << t_end;
  const auto traj = integrate(noise, cfg, 0, out);
  const double h = traj.step;

  // oracle: exact exponential convolution of the linearly interpolated
  // noise plus trapezoid time integrals, on the integrator lattice
  const double c = 0.5 * kphi;
  const double t0 = noise.t_start();
  const long steps = std::lround((t_end - t0) / h);
  const auto xi = [&](const Eigen::ArrayXd& series, double t) {
    const double u = (t - t0) / dt;
    const Eigen::Index i = std::min<Eigen::Index>(
        static_cast<Eigen::Index>(u), n - 2);
    const double f = u - static_cast<double>(i);
    return series[i] * (1.0 - f) + series[i + 1] * f;
  };
  double p = 0.0;          // int_{-inf}^t e^{-c(t-s)} xi_s(s) ds
  double phi = 0.0;        // outer time integral, trapezoid
  double prev_rate = 0.0;  // integrand at previous lattice point
  const double decay = std::exp(-c * h);
  for (long j = 0; j < steps; ++j) {
    const double t = t0 + h * static_cast<double>(j);
    const double a = xi(noise.xi_s, t);
    const double b = xi(noise.xi_s, t + h);
    // exact integral of e^{-c(t+h-s)} (a + (b-a)(s-t)/h) over [t, t+h]
    const double i0 = (1.0 - decay) / c;
    const double i1 = (h - i0) / c;  // weight of the linear ramp
    p = p * decay + a * i0 + (b - a) * i1 / h;
    const double t_next = t + h;
    if (t_next >= 0.0) {
      const double rate =
          xi(noise.xi_q, t_next) - cfg.alpha_s * c * p;
      if (t >= 0.0)
        phi += 0.5 * h * (prev_rate + rate);
      else
        phi += 0.5 * h * rate;  // first half-step after turn-on
      prev_rate = rate;
    }
  }
  CHECK(traj.nu[0].real() == doctest::Approx(phi).epsilon(2e-3));
  CHECK(std::abs(traj.nu[0].real()) > 1e-3);  // nontrivial signal
}

TEST_CASE("integrate: residual phase noise reproduces the cos-psi kernel") {
  const auto cfg = make_config(1.5, 40.0, 0.0, 1.0);
  const double kc = cfg.kappa_c;
  const auto s = SpectralDensity::lorentzian(0.5, 1.0);
  const double dt = 0.05;
  const Eigen::Index n = 1024;
  auto noise = synthesize(s, 1.0, dt, n, 1234);
  noise.preroll_samples = 240;  // 12 time units
  const double t_end = 4.0;
  Eigen::ArrayXd out(1);
  out << t_end;
  const auto traj = integrate(noise, cfg, 1, out);
  const auto traj_linear = integrate(noise, cfg, 0, out);

  // oracle: phi = int_0^t dt' [xi_q - (kc/2) a int_-inf^t' ds
  //   e^{-kc (t'-s)/2} cos(psi(t',s)) xi_s(s)],  psi = beta int_s^t' xi_s
  const double h = traj.step;
  const double t0 = noise.t_start();
  const long steps = std::lround((t_end - t0) / h);
  const auto xi = [&](const Eigen::ArrayXd& series, double t) {
    const double u = (t - t0) / dt;
    const Eigen::Index i = std::min<Eigen::Index>(
        static_cast<Eigen::Index>(u), n - 2);
    const double f = u - static_cast<double>(i);
    return series[i] * (1.0 - f) + series[i + 1] * f;
  };
  std::vector<double> xs(steps + 1), psi(steps + 1);
  for (long j = 0; j <= steps; ++j)
    xs[j] = xi(noise.xi_s, t0 + h * static_cast<double>(j));
  psi[0] = 0.0;  // cumulative trapezoid of beta xi_s
  for (long j = 1; j <= steps; ++j)
    psi[j] = psi[j - 1] + 0.5 * h * cfg.beta_s * (xs[j - 1] + xs[j]);

  const double c = 0.5 * kc;
  double phi = 0.0, prev_rate = 0.0;
  bool have_prev = false;
  for (long jt = 0; jt <= steps; ++jt) {
    const double t = t0 + h * static_cast<double>(jt);
    if (t < 0.0) continue;
    double inner = 0.0;  // trapezoid over s
    for (long js = 0; js <= jt; ++js) {
      const double sgap = h * static_cast<double>(jt - js);
      const double val =
          std::exp(-c * sgap) * std::cos(psi[jt] - psi[js]) * xs[js];
      inner += (js == 0 || js == jt) ? 0.5 * val : val;
    }
    inner *= h;
    const double rate = xi(noise.xi_q, t) - cfg.alpha_s * c * inner;
    if (have_prev) phi += 0.5 * h * (prev_rate + rate);
    prev_rate = rate;
    have_prev = true;
  }
  CHECK(traj.nu[0].real() == doctest::Approx(phi).epsilon(5e-3));
  // the nonlinearity is actually engaged
  CHECK(std::abs(traj.nu[0].real() - traj_linear.nu[0].real()) > 1e-4);
}

TEST_CASE("integrate: step halving changes the phase by < 1e-6 relative") {
  const auto cfg = make_config(1.0, 30.0, 0.0, 1.0);
  const auto s = SpectralDensity::lorentzian(0.3, 1.0);
  auto noise = synthesize(s, 1.0, 0.05, 2048, 5);
  noise.preroll_samples = 300;
  Eigen::ArrayXd out(1);
  out << 8.0;
  IntegrationOptions coarse, fine;
  coarse.max_step = 0.025;
  fine.max_step = 0.0125;
  for (int eps : {0, 1}) {
    const double a = integrate(noise, cfg, eps, out, coarse).nu[0].real();
    const double b = integrate(noise, cfg, eps, out, fine).nu[0].real();
    CHECK(std::abs(a - b) <= 1e-6 * std::abs(b));
  }
}

TEST_CASE("integrate: covariance purity bound along noisy trajectories") {
  const auto cfg = make_config(1.2, 25.0, 0.0, 1.0);
  const auto s = SpectralDensity::lorentzian(0.4, 1.0);
  auto noise = synthesize(s, 1.0, 0.05, 2048, 21);
  noise.preroll_samples = 300;
  const Eigen::ArrayXd out = Eigen::ArrayXd::LinSpaced(40, 0.0, 30.0);
  for (int eps : {0, 1}) {
    const auto traj = integrate(noise, cfg, eps, out);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      const double purity = traj.sigma_x[i] * traj.sigma_p[i] -
                            traj.sigma_xp[i] * traj.sigma_xp[i];
      CHECK(purity >= 0.25 - 1e-9);
    }
  }
}

TEST_CASE("integrate rejects internal loss and bad epsilon") {
  SpectatorConfig cfg = make_config(1.0, 10.0, 0.0, 1.0);
  const auto s = SpectralDensity::lorentzian(0.1, 1.0);
  auto noise = synthesize(s, 1.0, 0.1, 512, 9);
  Eigen::ArrayXd out(1);
  out << 1.0;
  cfg.kappa_i = 0.1;
  CHECK_THROWS_AS(integrate(noise, cfg, 0, out), Error);
  cfg.kappa_i = 0.0;
  CHECK_THROWS_AS(integrate(noise, cfg, 2, out), Error);
}

TEST_CASE("ensemble_chi: bare qubit recovers S0 t / 2") {
  const auto cfg = make_config(1.0, 10.0, 0.0, 0.0);
  const auto s = SpectralDensity::white(0.05);
  Eigen::ArrayXd grid(4);
  grid << 1.0, 3.0, 8.0, 20.0;
  const auto ens = ensemble_chi(s, cfg, 0, 400, 777, grid, 2);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(ens.chi[i] - 0.025 * ens.t[i]) <
          4.0 * ens.std_error[i]);
    CHECK(ens.resolvable[i]);
  }
}

TEST_CASE("ensemble_chi: linear drive matches the analytic engine") {
  const auto cfg = make_config(1.0, 100.0, 0.0, 1.0);
  const auto s = SpectralDensity::lorentzian(0.05, 2.0);
  const auto grid = log_grid(0.5, 30.0, 8);
  const auto ens = ensemble_chi(s, cfg, 0, 600, 4242, grid, 2);
  int within = 0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double analytic = chi_env(ens.t[i], cfg, s);
    if (std::abs(ens.chi[i] - analytic) < 3.0 * ens.std_error[i]) ++within;
  }
  CHECK(within >= 7);
}

TEST_CASE("ensemble_chi: bitwise deterministic across worker counts") {
  const auto cfg = make_config(1.0, 50.0, 0.0, 1.0);
  const auto s = SpectralDensity::lorentzian(0.1, 1.0);
  Eigen::ArrayXd grid(3);
  grid << 0.5, 2.0, 6.0;
  const auto a = ensemble_chi(s, cfg, 0, 120, 3141, grid, 1);
  const auto b = ensemble_chi(s, cfg, 0, 120, 3141, grid, 2);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    CHECK(a.chi[i] == b.chi[i]);
    CHECK(a.std_error[i] == b.std_error[i]);
  }
}

TEST_CASE("ensemble_chi flags statistically unresolvable points") {
  const auto cfg = make_config(1.0, 10.0, 0.0, 0.0);
  const auto s = SpectralDensity::white(4.0);
  Eigen::ArrayXd grid(2);
  grid << 0.5, 40.0;  // chi = 1 and chi = 80
  const auto ens = ensemble_chi(s, cfg, 0, 150, 11, grid, 2);
  CHECK(ens.resolvable[0]);
  CHECK(!ens.resolvable[1]);
}

TEST_CASE("ensemble_chi input guards") {
  const auto cfg = make_config(1.0, 10.0, 0.0, 1.0);
  const auto s = SpectralDensity::white(0.01);
  Eigen::ArrayXd grid(1);
  grid << 1.0;
  CHECK_THROWS_AS(ensemble_chi(s, cfg, 0, 50, 1, grid, 1), Error);
}

TEST_CASE("residual_rate_estimate closed forms") {
  const auto cfg = make_config(0.8, 10.0, 0.0, 1.0);
  // white: beta^2 S0 / kappa_c
  const auto w = SpectralDensity::white(0.02);
  const auto est_w = residual_rate_estimate(cfg, w);
  CHECK(est_w.ratio == doctest::Approx(0.64 * 0.02).epsilon(1e-7));
  CHECK(est_w.alpha_renorm ==
        doctest::Approx(1.0 - 0.5 * est_w.ratio).epsilon(1e-9));
  // zero spectrum
  const auto zero = SpectralDensity::white(0.0);
  CHECK(residual_rate_estimate(cfg, zero).ratio == 0.0);
  // lorentzian: beta^2 S0 [1 - (2/gamma)(1 - e^{-gamma/2})]
  for (double gamma : {1.0, 4.0}) {
    const auto lor = SpectralDensity::lorentzian(0.02, gamma);
    const double expected =
        0.64 * 0.02 *
        (1.0 - 2.0 / gamma * (1.0 - std::exp(-0.5 * gamma)));
    CHECK(residual_rate_estimate(cfg, lor).ratio ==
          doctest::Approx(expected).epsilon(1e-7));
  }
  // the estimate presumes weak noise
  const auto loud = SpectralDensity::white(10.0);
  CHECK_THROWS_AS(residual_rate_estimate(make_config(2.0, 10.0, 0.0, 1.0), loud),
                  Error);
}
