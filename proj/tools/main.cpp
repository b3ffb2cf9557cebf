#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "spectator/experiment.hpp"
#include "spectator/numerics.hpp"

namespace {

using nlohmann::json;

int exit_code_for(const std::string& code) {
  if (code.rfind("convergence:", 0) == 0) return 3;
  return 2;
}

void report_failure(const std::string& out_dir, const std::string& code,
                    const std::string& message) {
  const json err{{"status", "error"}, {"code", code}, {"message", message}};
  std::cerr << err.dump() << "\n";
  if (!out_dir.empty()) {
    std::error_code ignore;
    std::filesystem::create_directories(out_dir, ignore);
    std::ofstream f(std::filesystem::path(out_dir) / "error.json");
    if (f) f << err.dump(2) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "spectator: analytic, Monte-Carlo and photon-budget tools for "
      "spectator-mode noise mitigation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string figure_name;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;
  double tol = 0.0;
  int realizations = 0;

  if (const char* env = std::getenv("SPECTATOR_OUT")) out_dir = env;

  const auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path,
                                "experiment spec or run manifest (JSON)");
    if (needs_config) opt->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed override")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->add_option("--tol", tol, "quadrature tolerance override");
    sub->add_option("--realizations", realizations,
                    "Monte-Carlo realization count override");
  };

  const char* commands[] = {"validate",   "coherence-curve", "monte-carlo",
                            "optimize-photons", "delay-sweep", "loss-sweep"};
  for (const char* name : commands) add_common(app.add_subcommand(name), true);
  auto* fig = app.add_subcommand("figure", "reproduce a documented figure");
  fig->add_option("name", figure_name, "fig1b|fig3|fig4|fig5|fig6|fig7|fig8")
      ->required();
  add_common(fig, false);
  add_common(app.add_subcommand(
                 "run", "execute a spec exactly as written (manifest replay)"),
             true);

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();

  try {
    json j;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw spectator::Error("validation:missing_file",
                               "cannot open " + config_path);
      in >> j;
      if (j.contains("spec")) j = j.at("spec");
    }
    if (sub->get_name() != "run") {
      if (sub->get_name() == "figure") {
        j["command"] = "figure";
        j["figure"] = figure_name;
      } else {
        j["command"] = sub->get_name();
      }
    }
    if (seed_set) j["seed"] = seed;
    if (threads >= 0) j["threads"] = threads;
    if (tol > 0.0) j["tolerance"] = tol;
    if (realizations > 0) j["realizations"] = realizations;
    if (const char* env = std::getenv("SPECTATOR_THREADS"))
      j["threads"] = std::atoi(env);

    const auto spec = spectator::ExperimentSpec::from_json(j);
    const auto result = spectator::run(spec, out_dir);
    std::cout << result.report.dump(2) << "\n";
    return result.exit_code;
  } catch (const spectator::Error& e) {
    report_failure(out_dir, e.code(), e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    report_failure(out_dir, "validation:bad_json", e.what());
    return 2;
  } catch (const std::exception& e) {
    report_failure(out_dir, "internal:unexpected", e.what());
    return 1;
  }
}
