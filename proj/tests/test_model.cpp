#include <doctest.h>

#include <cmath>

#include "spectator/model.hpp"
#include "spectator/numerics.hpp"

using namespace spectator;

namespace {

SpectatorConfig make_config(double beta, double n1, double lambda2,
                            double alpha) {
  SpectatorConfig c;
  c.beta_s = beta;
  c.lambda2 = lambda2;
  c.alpha_s = alpha;
  c.set_n1(n1);
  return c;
}

}  // namespace

TEST_CASE("derive: feedforward off") {
  const auto c = make_config(1.0, 1.0, 0.0, 0.0);
  const auto d = derive(c);
  CHECK(d.gamma_ff == 0.0);
  CHECK(d.kappa_phi == doctest::Approx(1.0));
  CHECK(d.kappa_a == doctest::Approx(1.0));
  CHECK(d.n2 == 0.0);
  CHECK(d.n1 == doctest::Approx(1.0));
  CHECK(d.alpha_s_ideal == doctest::Approx(1.0));
}

TEST_CASE("derive: n2 at the documented squeezing point") {
  // lambda2 ~ 0.74 corresponds to n2 ~ 0.6
  CHECK(n2_of_lambda2(0.74) == doctest::Approx(0.6).epsilon(0.02));
  CHECK(lambda2_of_n2(0.6052166224580017) == doctest::Approx(0.74).epsilon(1e-6));
}

TEST_CASE("derive: gamma_ff from alpha_s closes the algebraic loop") {
  SpectatorConfig c = make_config(0.5, 0.0, 0.0, 1.0);
  // split n_cav = 1000 as in the headline operating point
  c.lambda2 = 0.74;
  c.set_n1(1000.0 - n2_of_lambda2(0.74));
  const auto d = derive(c);
  CHECK(alpha_from_gamma_ff(c, d.gamma_ff) ==
        doctest::Approx(c.alpha_s).epsilon(1e-13));
}

TEST_CASE("derive round trip over 1000 random valid configs") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    SpectatorConfig c;
    c.beta_s = 0.1 + 3.0 * rng.next_uniform();
    c.lambda2 = 0.99 * rng.next_uniform();
    c.alpha_s = 2.0 * rng.next_uniform();
    c.kappa_i = (i % 3 == 0) ? rng.next_uniform() : 0.0;
    c.eta = rng.next_uniform();
    c.set_n1(0.5 + 2000.0 * rng.next_uniform());
    const auto d = derive(c);
    if (c.alpha_s > 0.0)
      CHECK(std::abs(alpha_from_gamma_ff(c, d.gamma_ff) - c.alpha_s) <=
            1e-12 * c.alpha_s);
    CHECK(d.kappa_phi > 0.0);
    CHECK(d.kappa_a > 0.0);
    CHECK(d.alpha_s_ideal ==
          doctest::Approx(1.0 + c.kappa_i / c.kappa_c).epsilon(1e-14));
  }
}

TEST_CASE("derive: rejections") {
  SpectatorConfig c = make_config(1.0, 1.0, 0.0, 0.0);
  c.lambda2 = 1.0;
  CHECK_THROWS_AS(derive(c), Error);
  c.lambda2 = 1.2;
  CHECK_THROWS_AS(derive(c), Error);

  // transduction undefined when the mode is undisplaced
  SpectatorConfig undispl = make_config(1.0, 0.0, 0.0, 1.0);
  CHECK_THROWS_AS(derive(undispl), Error);
  CHECK_THROWS_AS(derive(undispl), Error);

  SpectatorConfig bad_eta = make_config(1.0, 1.0, 0.0, 1.0);
  bad_eta.eta = 1.5;
  CHECK_THROWS_AS(derive(bad_eta), Error);
}

TEST_CASE("validity_linear_noise: white closed form") {
  // M = beta^2 S0 / (4 kc)
  auto c = make_config(1.0, 10.0, 0.0, 1.0);
  const auto s = SpectralDensity::white(0.04);
  CHECK(validity_linear_noise(c, s) == doctest::Approx(0.01).epsilon(1e-7));

  const auto zero = SpectralDensity::white(0.0);
  CHECK(validity_linear_noise(c, zero) == 0.0);
}

TEST_CASE("validity_linear_noise: headline operating point passes") {
  auto c = make_config(0.5, 1000.0, 0.0, 1.0);
  const auto s = SpectralDensity::white(0.001);
  const double m = validity_linear_noise(c, s);
  CHECK(m == doctest::Approx(0.25 * 0.001 / 4.0).epsilon(1e-7));
  CHECK(m < 0.05);
}

TEST_CASE("validity_squeezing: lambda2 = 0 passes iff margin < 1/16") {
  auto c = make_config(1.0, 10.0, 0.0, 1.0);
  // margin = S0/4 here; S0 = 0.2 -> margin = 0.05 < 1/16 passes
  auto rep = validity_squeezing(c, SpectralDensity::white(0.2));
  CHECK(rep.squeezing_pass);
  // S0 = 0.28 -> margin = 0.07 > 1/16 fails even unsqueezed
  rep = validity_squeezing(c, SpectralDensity::white(0.28));
  CHECK(!rep.squeezing_pass);
  CHECK(rep.squeezing_limit == 0.0);
}

TEST_CASE("validity_squeezing: headline squeezing point passes") {
  auto c = make_config(0.5, 1000.0, 0.74, 1.0);
  const auto rep = validity_squeezing(c, SpectralDensity::white(0.001));
  CHECK(rep.squeezing_pass);
  // admissible limit sits just above the operating value
  CHECK(rep.squeezing_limit > 0.74);
  CHECK(rep.squeezing_limit == doctest::Approx(0.822).epsilon(0.01));
}

TEST_CASE("validity_squeezing: quasistatic narrow-line limit") {
  // A narrow Lorentzian of total variance sigma^2 concentrates its weight at
  // omega -> 0, where the integrand approaches sigma^2/(4 kc^2); the
  // admissible-lambda2 bound then reads (1-l2)^4 >= 16 beta^2 sigma^2/(4 kc^2).
  const double sigma2 = 1e-4;
  const double gamma = 1e-5;
  const double s0 = 4.0 * sigma2 / gamma;
  auto c = make_config(0.8, 10.0, 0.0, 1.0);
  const auto s = SpectralDensity::lorentzian(s0, gamma);
  const double m = validity_linear_noise(c, s, 1e-9);
  CHECK(m == doctest::Approx(c.beta_s * c.beta_s * sigma2 / 4.0).epsilon(1e-3));
  const auto rep = validity_squeezing(c, s);
  const double expected_limit =
      1.0 - std::pow(16.0 * c.beta_s * c.beta_s * sigma2 / 4.0, 0.25);
  CHECK(rep.squeezing_limit == doctest::Approx(expected_limit).epsilon(1e-3));
}

TEST_CASE("squeezing limit is non-increasing in S0 and beta_s") {
  double prev = 1.0;
  for (double s0 : {1e-4, 1e-3, 1e-2, 0.05}) {
    auto c = make_config(1.0, 10.0, 0.0, 1.0);
    const auto rep = validity_squeezing(c, SpectralDensity::white(s0));
    CHECK(rep.squeezing_limit <= prev + 1e-12);
    prev = rep.squeezing_limit;
  }
  prev = 1.0;
  for (double beta : {0.2, 0.5, 1.0, 2.0}) {
    auto c = make_config(beta, 10.0, 0.0, 1.0);
    const auto rep = validity_squeezing(c, SpectralDensity::white(1e-3));
    CHECK(rep.squeezing_limit <= prev + 1e-12);
    prev = rep.squeezing_limit;
  }
}

TEST_CASE("ideal transduction factor with internal loss") {
  for (double ki : {0.0, 1e-3, 0.3, 2.0}) {
    SpectatorConfig c = make_config(1.0, 10.0, 0.0, 1.0);
    c.kappa_i = ki;
    CHECK(derive(c).alpha_s_ideal == 1.0 + ki);
  }
}
