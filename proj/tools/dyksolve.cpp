#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "dyksplit/errors.hpp"
#include "dyksplit/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dyksplit: splitting solver harness"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "run a problem file");
  std::string spec_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int max_sweeps = 0;
  std::string mode;
  solve->add_option("spec", spec_path, "problem file (JSON)")->required();
  solve->add_option("--out", out_dir, "output directory")->required();
  auto* seed_opt = solve->add_option("--seed", seed, "schedule seed override");
  auto* sweeps_opt =
      solve->add_option("--max-sweeps", max_sweeps, "sweep cap override");
  solve
      ->add_option("--mode", mode, "mode override")
      ->check(CLI::IsMember({"dykstra", "rate", "proxpoint"}));

  CLI11_PARSE(app, argc, argv);

  dyksplit::harness::CliOverrides overrides;
  if (seed_opt->count() > 0) overrides.seed = seed;
  if (sweeps_opt->count() > 0) overrides.max_sweeps = max_sweeps;
  if (!mode.empty()) overrides.mode = mode;

  try {
    const auto run = dyksplit::harness::parse_problem_file(spec_path, overrides);
    const auto outputs = dyksplit::harness::run_to_files(run, out_dir);
    for (const std::string& f : outputs.files) std::cout << f << "\n";
    return 0;
  } catch (const dyksplit::SpecError& e) {
    std::cerr << "spec error: " << e.what() << "\n";
    return 2;
  } catch (const dyksplit::CertificateTimeout& e) {
    std::cerr << "timeout: " << e.what()
              << " (best residual " << e.best_residual
              << ", best feasibility residual " << e.best_feas_residual
              << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
