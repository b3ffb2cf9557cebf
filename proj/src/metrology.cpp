#include "spectator/metrology.hpp"

#include <cmath>

#include "spectator/coherence.hpp"
#include "spectator/numerics.hpp"

namespace spectator {

PhotonBudget PhotonBudget::from_config(const SpectatorConfig& cfg, double T) {
  if (T <= 0.0)
    throw Error("validation:bad_value:T", "integration window must be > 0");
  PhotonBudget b;
  b.T = T;
  b.n_d = cfg.n1() * cfg.kappa_c * T;
  b.n_s = n_s_of_lambda2(cfg.lambda2);
  return b;
}

double n_s_of_lambda2(double lambda2) {
  const double d = 1.0 - lambda2 * lambda2;
  return 4.0 * lambda2 * lambda2 / (d * d);
}

double lambda2_of_n_s(double n_s) {
  if (n_s < 0.0) throw Error("validation:bad_value:n_s", "n_s must be >= 0");
  if (n_s == 0.0) return 0.0;
  return bisect_root([n_s](double l2) { return n_s_of_lambda2(l2) - n_s; },
                     0.0, 1.0 - 1e-16, 1e-14);
}

EstimationResult estimation_error(const SpectatorConfig& cfg, double T) {
  cfg.validate();
  const double n1 = cfg.n1();
  if (n1 <= 0.0 || T <= 0.0)
    throw Error("validation:bad_value:photons",
                "estimation error needs n1 > 0 and T > 0");
  EstimationResult r;
  const double l2 = cfg.lambda2;
  r.variance = (1.0 - l2) * (1.0 - l2) / ((1.0 + l2) * (1.0 + l2));
  r.slope = 2.0 * cfg.beta_s * std::sqrt(2.0 * n1 * cfg.kappa_c * T) /
            ((1.0 + l2) * cfg.kappa_c);
  r.delta_xi0 = std::sqrt(r.variance) / r.slope;
  return r;
}

double estimation_error_asymptotic(double n_d, double n_s, double beta_s,
                                   double kappa_c) {
  return kappa_c / (2.0 * beta_s * std::sqrt(2.0 * n_d * n_s));
}

double estimation_error_unsqueezed(double n_d, double beta_s, double kappa_c) {
  return kappa_c / (2.0 * beta_s * std::sqrt(2.0 * n_d));
}

double lambda_from_error(const SpectatorConfig& cfg, double T) {
  const double dxi = estimation_error(cfg, T).delta_xi0;
  const double lam = 0.25 * T * T * dxi * dxi;
  SpectatorConfig at_ideal = cfg;
  at_ideal.alpha_s = 1.0;
  const double linear = lambda_imp_rate(at_ideal) * T;
  if (std::abs(lam - linear) > 0.01 * std::max(lam, linear))
    throw Error("validation:consistency",
                "(T^2/4) dxi^2 disagrees with the Lambda_imp long-time slope");
  return lam;
}

double single_mode_angle_error(double n_total, bool squeezed) {
  if (n_total < 1.0)
    throw Error("validation:bad_value:n", "need at least one photon");
  if (!squeezed) return 1.0 / (2.0 * std::sqrt(n_total));
  return 1.0 / n_total;
}

double single_mode_angle_error_split(double n_d, double n_s) {
  return 1.0 / (4.0 * std::sqrt(n_d * n_s));
}

PartitionOptimum optimize_incident(double n_inc, double beta_s, double kappa_c,
                                   double T, bool allow_squeezing) {
  (void)T;  // the asymptotic error depends on the window only through n_d
  if (n_inc <= 0.0)
    throw Error("validation:bad_value:n_inc", "n_inc must be > 0");
  PartitionOptimum opt;
  if (!allow_squeezing) {
    opt.n_d = n_inc;
    opt.n_s = 0.0;
    opt.value = estimation_error_unsqueezed(n_inc, beta_s, kappa_c);
    return opt;
  }
  const auto objective = [&](double n_d) {
    return estimation_error_asymptotic(n_d, n_inc - n_d, beta_s, kappa_c);
  };
  const double lo = 1e-9 * n_inc;
  opt.n_d = golden_min(objective, lo, n_inc - lo, 1e-12);
  opt.n_s = n_inc - opt.n_d;
  // documented normalization: sqrt(2) kc/(beta n_inc) at the equal split
  opt.value = 2.0 * objective(opt.n_d);
  return opt;
}

IntracavityOptimum optimize_intracavity(double n_cav, double t0,
                                        const SpectatorConfig& base) {
  if (n_cav <= 1.0)
    throw Error("validation:bad_value:n_cav", "n_cav must exceed 1");
  if (t0 <= 0.0)
    throw Error("validation:bad_value:t0", "target time must be > 0");

  const auto objective = [&](double n2) {
    SpectatorConfig cfg = base;
    cfg.alpha_s = 1.0;
    cfg.lambda2 = lambda2_of_n2(n2);
    cfg.set_n1(n_cav - n2);
    return lambda_imp(t0, cfg);
  };

  // 200-point log grid seed, then golden refinement around the best cell
  const int grid_points = 200;
  const double n2_lo = 1e-6;
  const double n2_hi = n_cav * (1.0 - 1e-9);
  double best_n2 = n2_lo;
  double best_val = objective(n2_lo);
  const double step = std::log(n2_hi / n2_lo) / (grid_points - 1);
  Eigen::ArrayXd grid(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    grid[i] = n2_lo * std::exp(step * i);
    const double v = objective(grid[i]);
    if (v < best_val * (1.0 - 1e-12)) {
      best_val = v;
      best_n2 = grid[i];
    }
  }
  double lo = best_n2 / std::exp(step);
  double hi = std::min(best_n2 * std::exp(step), n2_hi);
  if (best_n2 <= grid[0]) lo = 0.0;  // boundary minimum: allow n2 -> 0
  const double refined = golden_min(objective, lo, hi, 1e-8);
  const double refined_val = objective(refined);

  IntracavityOptimum opt;
  opt.n2 = refined_val < best_val ? refined : best_n2;
  opt.lambda_imp_min = std::min(refined_val, best_val);
  opt.n1 = n_cav - opt.n2;
  opt.lambda2 = lambda2_of_n2(opt.n2);
  return opt;
}

PartitionOptimum optimize_with_loss(double n_inc, double kappa_i_ratio,
                                    double beta_s, double T) {
  if (n_inc <= 0.0)
    throw Error("validation:bad_value:n_inc", "n_inc must be > 0");
  if (kappa_i_ratio < 0.0)
    throw Error("validation:bad_value:kappa_i", "kappa_i/kappa_c must be >= 0");
  const double ktot_over_kc = 1.0 + kappa_i_ratio;
  // deep-squeezing limit of the phase-quadrature bandwidth
  const double kphi = 2.0 * ktot_over_kc;
  const double pref =
      kphi * T * kphi * T / (64.0 * beta_s * beta_s) * ktot_over_kc;
  const auto objective = [&](double n_s) {
    const double n_d = n_inc - n_s;
    return pref * (1.0 / (n_d * n_s) + 2.0 * kappa_i_ratio / n_d);
  };
  // coarse grid then golden refinement (objective is unimodal in n_s)
  const int grid_points = 400;
  const double lo_edge = n_inc * 1e-9;
  double best = lo_edge, best_val = objective(lo_edge);
  for (int i = 1; i < grid_points; ++i) {
    const double n_s = n_inc * (static_cast<double>(i) / grid_points);
    if (n_s <= lo_edge || n_s >= n_inc - lo_edge) continue;
    const double v = objective(n_s);
    if (v < best_val) {
      best_val = v;
      best = n_s;
    }
  }
  const double width = n_inc / grid_points;
  const double refined =
      golden_min(objective, std::max(lo_edge, best - width),
                 std::min(n_inc - lo_edge, best + width), 1e-10);
  PartitionOptimum opt;
  opt.n_s = objective(refined) < best_val ? refined : best;
  opt.n_d = n_inc - opt.n_s;
  opt.value = objective(opt.n_s);
  return opt;
}

}  // namespace spectator
