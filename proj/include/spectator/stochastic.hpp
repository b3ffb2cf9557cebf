#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <string>

#include "spectator/model.hpp"
#include "spectator/spectral_density.hpp"

namespace spectator {

/// One sampled pair of stationary Gaussian noise series with correlation eta.
/// Sample index `preroll_samples` marks t = 0; earlier samples warm up the
/// spectator toward its noise-driven stationary state.
struct NoiseRealization {
  double dt = 0.0;
  Eigen::ArrayXd xi_q;
  Eigen::ArrayXd xi_s;
  std::uint64_t seed = 0;
  double eta = 1.0;
  std::string spectrum;
  Eigen::Index preroll_samples = 0;

  Eigen::Index n_samples() const { return xi_q.size(); }
  double t_start() const { return -dt * static_cast<double>(preroll_samples); }
};

struct SynthesisOptions {
  /// Accept a time step that does not resolve the spectrum (needed for white
  /// noise, which is then band-limited at pi/dt by construction).
  bool allow_aliasing = false;
};

/// Frequency-domain synthesis: independent complex Gaussian amplitudes with
/// variance S[w_k] dw / 2pi on a Hermitian-symmetric grid, inverse FFT to a
/// real series. xi_s = eta xi_q + sqrt(1-eta^2) xi' with xi' independent.
/// Requires S[pi/dt] < 1e-3 S[0] unless options.allow_aliasing.
NoiseRealization synthesize(const SpectralDensity& s, double eta, double dt,
                            Eigen::Index n_samples, std::uint64_t seed,
                            const SynthesisOptions& options = {});

/// Gaussian Wigner parameters along one noise realization. nu is the complex
/// overall phase: Re nu is the accumulated phase, -Im nu >= 0 the
/// measurement-imprecision dephasing.
struct GaussianTrajectory {
  Eigen::ArrayXd t;  ///< output times >= 0, snapped to the step lattice
  Eigen::ArrayXcd nu;
  Eigen::ArrayXcd xbar;
  Eigen::ArrayXcd pbar;
  Eigen::ArrayXd sigma_x;
  Eigen::ArrayXd sigma_p;
  Eigen::ArrayXd sigma_xp;
  int epsilon = 0;
  double step = 0.0;
};

struct IntegrationOptions {
  double max_step = 0.0;      ///< 0: step rule h = min(dt, 1/(40 kphi))
  double sigma_abort = 1e6;   ///< instability guard on covariance growth
};

/// Fixed-step RK4 for the six coupled Gaussian-parameter ODEs, with the noise
/// linearly interpolated inside steps. epsilon = 1 retains the residual
/// phase-noise coupling, epsilon = 0 is the linear noise drive. Starts from
/// the analytic steady state at t = -preroll; the qubit terms and the
/// feedforward switch on at t = 0. Internal loss is outside the validated
/// scope of this integrator and is rejected.
GaussianTrajectory integrate(const NoiseRealization& noise,
                             const SpectatorConfig& config, int epsilon,
                             const Eigen::ArrayXd& out_times,
                             const IntegrationOptions& options = {});

struct EnsembleChi {
  Eigen::ArrayXd t;          ///< snapped evaluation times
  Eigen::ArrayXd chi;        ///< -ln |mean exp(i phi)|
  Eigen::ArrayXd std_error;  ///< jackknife standard error
  Eigen::Array<bool, Eigen::Dynamic, 1> resolvable;  ///< chi < 5
  double dt = 0.0;
  double step = 0.0;
  double preroll = 0.0;
  int n_realizations = 0;
  std::uint64_t master_seed = 0;
};

/// Monte-Carlo decoherence: chi_n(t) = -ln |ensemble mean of e^{i phi}| with
/// phi = Re nu (quantum imaginary parts excluded). Realizations are
/// independent substreams of master_seed; the reduction is order-fixed, so
/// results are bitwise identical for any worker count.
///
/// Sampling policy: the noise step dt resolves both the spectrum and the
/// integrator step (dt <= 1/(40 kphi); half that for band-limited white
/// noise), and each trajectory warms up over a preroll of
/// 10 max(1/kphi, correlation time), bounding the truncated feedforward
/// history by e^{-kphi preroll/2}.
EnsembleChi ensemble_chi(const SpectralDensity& s, const SpectatorConfig& config,
                         int epsilon, int n_realizations,
                         std::uint64_t master_seed,
                         const Eigen::ArrayXd& t_grid, int threads = 0);

struct ResidualEstimate {
  double ratio = 0.0;        ///< Gamma_res / Gamma_0
  double gamma_res = 0.0;    ///< ratio * S[0]/2
  double alpha_renorm = 0.0; ///< alpha_s (1 - ratio/2)
};

/// Linear estimate of the residual dephasing caused by the displaced-frame
/// phase noise: Gamma_res/Gamma_0 = beta^2 int dw/2pi S[w]/w^2 |Y_fid(w,1/kc)|^2.
ResidualEstimate residual_rate_estimate(const SpectatorConfig& config,
                                        const SpectralDensity& s,
                                        double tol = 1e-8);

}  // namespace spectator
