// phasehom command-line front end.
#include "phasehom/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  CLI::App app{"Homogenised densities of phase-field cell problems"};
  std::string config_path;
  phasehom::RunOverrides overrides;
  std::string out;
  int jobs = 0;
  std::uint64_t seed = 0;
  double tol_scale = 0.0;
  app.add_option("--config", config_path, "Config file (key = value lines)")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides the config)");
  auto* jobs_opt = app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed-override", seed, "Replace the seeds by S, S+1, ...");
  auto* tol_opt = app.add_option("--tol-scale", tol_scale, "Multiply verification tolerances")
                      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  if (*out_opt) overrides.out = out;
  if (*jobs_opt) overrides.jobs = jobs;
  if (*seed_opt) overrides.seed = seed;
  if (*tol_opt) overrides.tol_scale = tol_scale;

  phasehom::RunConfig cfg;
  try {
    std::ifstream f(config_path);
    std::stringstream text;
    text << f.rdbuf();
    cfg = phasehom::apply_overrides(phasehom::parse_config(text.str()), overrides);
  } catch (const std::exception& e) {
    std::cerr << "phasehom: " << e.what() << '\n';
    return 1;
  }

  const phasehom::RunOutcome outcome = phasehom::run(cfg);
  if (!outcome.report.checks().empty()) phasehom::write_verify_summary(std::cout, outcome.report.checks());
  if (outcome.exit_code != 0) std::cerr << "phasehom: " << outcome.message << '\n';
  else std::cout << "phasehom: results written to " << cfg.out << '\n';
  return outcome.exit_code;
}
