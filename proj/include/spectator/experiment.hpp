#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectator/coherence.hpp"
#include "spectator/model.hpp"
#include "spectator/spectral_density.hpp"

namespace spectator {

/// Declarative description of one run: parsed from JSON, fully resolved
/// (defaults applied, units converted), and serializable back so that a run
/// manifest re-ingests to the identical run.
struct ExperimentSpec {
  std::string command;
  nlohmann::json raw;  ///< resolved spec (what the manifest stores)

  SpectatorConfig config;
  std::optional<SpectralDensity> spectrum;
  Eigen::ArrayXd time_grid;

  std::uint64_t seed = 12345;
  int realizations = 10000;
  int epsilon = 0;
  double tolerance = 1e-8;
  int threads = 0;
  double validity_threshold = 0.05;

  // command-specific knobs
  std::string figure;
  std::string mode;  ///< optimize-photons: "intracavity" | "incident"
  double n_cav = 0.0, t0 = 0.0, n_inc = 0.0, window = 0.0;
  std::vector<double> tau_d_values;
  std::vector<double> kappa_i_ratios;
  std::vector<double> n_inc_values;

  static ExperimentSpec from_json(const nlohmann::json& j);
  static ExperimentSpec from_file(const std::string& path);
};

SpectatorConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SpectatorConfig& config);
SpectralDensity spectrum_from_json(const nlohmann::json& j);

struct RunResult {
  int exit_code = 0;
  nlohmann::json report;
  std::vector<std::string> outputs;  ///< paths written, relative to out_dir
};

/// Executes the spec, writing artifacts plus run_manifest.json and
/// report.json under out_dir. Validation gates are evaluated first and land
/// in the report. Throws Error on validation/convergence failure.
RunResult run(const ExperimentSpec& spec, const std::string& out_dir);

struct TphiResult {
  bool reached = false;
  double t_phi = 0.0;
  double chi_max = 0.0;
};

/// Dephasing time chi(T_phi) = 1, found by bisecting the analytic evaluator
/// between the grid points that bracket the crossing (absolute tolerance
/// 1e-6/kappa_c). Rejects curves with decreasing chi samples.
TphiResult tphi(const CoherenceCurve& curve,
                const std::function<double(double)>& chi_total,
                double kappa_c = 1.0);

void write_curve_csv(const std::string& path, const CoherenceCurve& curve);

}  // namespace spectator
