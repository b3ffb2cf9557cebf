#include <doctest.h>

#include <cmath>

#include "spectator/numerics.hpp"
#include "spectator/quadrature.hpp"
#include "spectator/spectral_density.hpp"

using namespace spectator;

namespace {

SpectralWeight fid_kernel(double t) {
  SpectralWeight w;
  w.shape = [](double) { return 1.0; };
  w.osc_time = t;
  w.windowed = true;
  w.shape_bound = 1.0;
  return w;
}

SpectralWeight bandpass_kernel(double t, double kappa_phi) {
  const double c = 0.5 * kappa_phi;
  SpectralWeight w;
  w.shape = [c](double x) { return x * x / (x * x + c * c); };
  w.osc_time = t;
  w.windowed = true;
  w.shape_bound = 1.0;
  w.shape_scale = kappa_phi;
  return w;
}

SpectralWeight spectator_kernel(double t, double alpha, double kappa_phi) {
  const double c = 0.5 * kappa_phi;
  const double k = (1.0 - alpha) * (1.0 - alpha);
  SpectralWeight w;
  w.shape = [c, k](double x) {
    return (x * x + c * c * k) / (x * x + c * c);
  };
  w.osc_time = t;
  w.windowed = true;
  w.shape_bound = std::max(1.0, k);
  w.shape_scale = kappa_phi;
  return w;
}

// total weight of the ideal-transduction filter, closed form
double spectral_weight_closed(double alpha, double kappa_phi, double t) {
  return (1.0 - alpha) * (1.0 - alpha) * t +
         2.0 / kappa_phi * alpha * (2.0 - alpha) *
             (1.0 - std::exp(-0.5 * kappa_phi * t));
}

}  // namespace

TEST_CASE("evaluate: white and lorentzian basics") {
  const auto white = SpectralDensity::white(1.0);
  CHECK(white(17.0) == doctest::Approx(1.0));
  CHECK(white(-17.0) == doctest::Approx(1.0));

  const double s0 = 0.3, gamma = 2.0;
  const auto lor = SpectralDensity::lorentzian(s0, gamma);
  CHECK(lor(0.0) == doctest::Approx(s0));
  // half width: S[gamma/2] = S0/2
  CHECK(lor(gamma / 2.0) == doctest::Approx(s0 / 2.0));
  CHECK(lor(-gamma / 2.0) == doctest::Approx(lor(gamma / 2.0)));
}

TEST_CASE("evaluate: tabulated interpolation, mirroring, extensions") {
  const double s0 = 1.0, gamma = 1.0;
  const auto ref = SpectralDensity::lorentzian(s0, gamma);
  const int n = 400;
  Eigen::ArrayXd w(n), v(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.05 + 20.0 * i / (n - 1);
    v[i] = ref(w[i]);
  }
  const auto tab = SpectralDensity::tabulated(w, v);

  Rng rng(7);
  for (int k = 0; k < 50; ++k) {
    const double omega = 0.1 + 15.0 * rng.next_uniform();
    CHECK(tab(omega) == doctest::Approx(ref(omega)).epsilon(1e-4));
    CHECK(tab(-omega) == doctest::Approx(tab(omega)));  // evenness
  }
  // flat infrared extension keeps S[0] finite at the lowest sample
  CHECK(tab(0.0) == doctest::Approx(ref(0.05)));
  CHECK(tab(0.01) == doctest::Approx(ref(0.05)));
  // zero beyond the grid
  CHECK(tab(25.0) == 0.0);
}

TEST_CASE("tabulated interpolant never overshoots below zero") {
  Eigen::ArrayXd w(6), v(6);
  w << 0.0, 1.0, 2.0, 3.0, 4.0, 5.0;
  v << 1.0, 0.01, 0.8, 0.0, 0.0, 0.4;
  const auto tab = SpectralDensity::tabulated(w, v);
  for (double x = 0.0; x <= 5.0; x += 0.001) CHECK(tab(x) >= 0.0);
}

TEST_CASE("weighted_integral: white-noise FID kernel gives S0 t") {
  const double s0 = 0.7;
  const auto s = SpectralDensity::white(s0);
  for (double t : {0.02, 0.5, 3.0, 40.0, 2000.0}) {
    const auto q = weighted_integral(s, fid_kernel(t), 1e-8);
    REQUIRE(q.converged);
    CHECK(q.value == doctest::Approx(s0 * t).epsilon(1e-7));
  }
}

TEST_CASE("weighted_integral: white-noise bandpass kernel (residue form)") {
  const double s0 = 0.4, kphi = 1.3;
  const auto s = SpectralDensity::white(s0);
  for (double t : {0.1, 1.0, 7.0, 120.0}) {
    const auto q = weighted_integral(s, bandpass_kernel(t, kphi), 1e-8);
    REQUIRE(q.converged);
    const double expected =
        2.0 * s0 / kphi * (1.0 - std::exp(-0.5 * kphi * t));
    CHECK(q.value == doctest::Approx(expected).epsilon(1e-7));
  }
}

TEST_CASE("weighted_integral: lorentzian FID kernel equals 2 chi_0") {
  const double s0 = 0.9, gamma = 2.5;
  const auto s = SpectralDensity::lorentzian(s0, gamma);
  for (double t : {0.05, 0.8, 5.0, 60.0, 1500.0}) {
    const auto q = weighted_integral(s, fid_kernel(t), 1e-8);
    REQUIRE(q.converged);
    const double chi0 =
        0.5 * s0 * (t - 2.0 / gamma * (1.0 - std::exp(-0.5 * gamma * t)));
    CHECK(q.value == doctest::Approx(2.0 * chi0).epsilon(1e-7));
  }
}

TEST_CASE("spectral-weight identity over the stated grid") {
  const auto s = SpectralDensity::white(1.0);
  const double kphi = 1.0;
  for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
    for (double kt : {0.1, 1.0, 10.0}) {
      const auto q =
          weighted_integral(s, spectator_kernel(kt, alpha, kphi), 1e-8);
      REQUIRE(q.converged);
      CHECK(q.value ==
            doctest::Approx(spectral_weight_closed(alpha, kphi, kt))
                .epsilon(1e-6));
    }
  }
}

TEST_CASE("FID spectral weight is conserved, spectator weight is smaller") {
  const auto s = SpectralDensity::white(1.0);
  const double kphi = 2.0;
  for (double t : {0.3, 2.0, 25.0}) {
    const auto dd = weighted_integral(s, fid_kernel(t), 1e-8);
    REQUIRE(dd.converged);
    CHECK(dd.value == doctest::Approx(t).epsilon(1e-7));
    for (double alpha : {0.25, 0.8, 1.0, 1.5, 1.9}) {
      const double w = spectral_weight_closed(alpha, kphi, t);
      CHECK(w < t);
      const auto q =
          weighted_integral(s, spectator_kernel(t, alpha, kphi), 1e-8);
      CHECK(q.value == doctest::Approx(w).epsilon(1e-6));
    }
  }
}

TEST_CASE("weighted_integral: trivial limits") {
  const auto s = SpectralDensity::white(1.0);
  auto q = weighted_integral(s, fid_kernel(0.0), 1e-8);
  CHECK(q.converged);
  CHECK(q.value == 0.0);

  const auto zero = SpectralDensity::white(0.0);
  q = weighted_integral(zero, fid_kernel(3.0), 1e-8);
  CHECK(q.converged);
  CHECK(q.value == 0.0);
}

TEST_CASE("smooth bump weight matches dense trapezoid integration") {
  const double tol = 1e-6;
  Eigen::ArrayXd grid(60), values(60);
  for (int i = 0; i < 60; ++i) {
    grid[i] = 0.1 + 0.1 * i;
    values[i] = 1.0 / (1.0 + grid[i]);
  }
  const SpectralDensity kinds[] = {
      SpectralDensity::white(0.8),
      SpectralDensity::lorentzian(0.8, 3.0),
      SpectralDensity::tabulated(grid, values)};
  SpectralWeight w;
  w.shape = [](double x) {
    if (x <= 1.0 || x >= 2.0) return 0.0;
    return std::exp(-1.0 / ((x - 1.0) * (2.0 - x)));
  };
  w.osc_time = 0.0;
  w.shape_bound = 1.0;
  w.shape_scale = 2.0;
  w.shape_cutoff = 2.0;

  for (const auto& s : kinds) {
    const auto q = weighted_integral(s, w, tol);
    REQUIRE(q.converged);
    const int n = 40001;
    double acc = 0.0;
    const double h = 1.0 / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double x = 1.0 + i * h;
      const double f = s(x) * w.shape(x);
      acc += (i == 0 || i == n - 1) ? 0.5 * f : f;
    }
    const double reference = acc * h / 3.14159265358979323846;
    CHECK(q.value == doctest::Approx(reference).epsilon(10.0 * tol));
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  // bounded non-oscillatory weight against white noise: divergent integral
  const auto s = SpectralDensity::white(1.0);
  SpectralWeight w;
  w.shape = [](double) { return 1.0; };
  w.osc_time = 0.0;
  w.shape_bound = 1.0;
  const auto q = weighted_integral(s, w, 1e-8);
  CHECK(!q.converged);
  CHECK(q.error > 0.0);
}

TEST_CASE("tabulated spectrum integrates over its finite support only") {
  // tabulated lorentzian truncated at omega = 40: compare to closed form
  const double s0 = 1.0, gamma = 1.0;
  const auto ref = SpectralDensity::lorentzian(s0, gamma);
  const int n = 2000;
  Eigen::ArrayXd w(n), v(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 1e-3 + (40.0 - 1e-3) * i / (n - 1);
    v[i] = ref(w[i]);
  }
  const auto tab = SpectralDensity::tabulated(w, v);
  const double t = 6.0;
  const auto qt = weighted_integral(tab, fid_kernel(t), 1e-7);
  const auto qr = weighted_integral(ref, fid_kernel(t), 1e-9);
  REQUIRE(qt.converged);
  // truncation + interpolation differences stay under a few 1e-4 relative
  CHECK(qt.value == doctest::Approx(qr.value).epsilon(5e-4));
}

TEST_CASE("csv round trip") {
  const std::string path = "/tmp/spectator_test_spectrum.csv";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("omega,S\n0.0,1.0\n1.0,0.5\n2.0,0.2\n4.0,0.05\n", f);
    std::fclose(f);
  }
  const auto s = SpectralDensity::from_csv(path);
  CHECK(s(0.0) == doctest::Approx(1.0));
  CHECK(s(1.0) == doctest::Approx(0.5));
  CHECK(s(5.0) == 0.0);
}
