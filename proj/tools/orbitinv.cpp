// orbitinv: batch front end for simulation, resonance classification,
// periodic-orbit refinement, invariant verification, parameter scans and
// Helmholtz decomposition of sampled fields.

#include <CLI11.hpp>
#include <iostream>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace orbitinv::cli;

  CLI::App app{"Periodic orbits and integral invariants of planar vortical-force systems"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option_function<std::string>("--config", [&](const std::string& v) { opt.config_path = v; },
                                          "JSON run configuration");
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { opt.out_dir = v; },
                                          "Output directory (overrides output_dir)");
    sub->add_option_function<std::string>("--state", [&](const std::string& v) { opt.state = v; },
                                          "Initial state x,y,p,r");
    sub->add_option_function<double>("--t-end", [&](double v) { opt.t_end = v; }, "End time / horizon");
    sub->add_option_function<double>("--seed-period", [&](double v) { opt.seed_period = v; },
                                     "Seed period for orbit refinement");
    sub->add_option_function<std::size_t>("--resolution", [&](std::size_t v) { opt.resolution = v; },
                                          "Area-form grid resolution");
  };

  const char* help[] = {"Integrate and write trajectory.csv + summary.json",
                        "Estimate frequencies and write classification.json",
                        "Refine a periodic orbit; write orbit.json + curve.csv",
                        "Refine an orbit and check the invariant; write report.json",
                        "Run a parameter/initial-state scan; write scan.csv",
                        "Split a grid field CSV into U and psi",
                        "Write demo configs and verify the 1:2 resonant system"};
  std::vector<CLI::App*> subs;
  for (std::size_t k = 0; k < command_names().size(); ++k) {
    CLI::App* sub = app.add_subcommand(command_names()[k], help[k]);
    add_common(sub);
    subs.push_back(sub);
  }
  CLI::App* decompose = app.get_subcommand("decompose");
  decompose->add_option_function<std::string>("--field", [&](const std::string& v) { opt.field_path = v; },
                                              "Grid field CSV (x,y,Fx,Fy)");
  decompose->add_option("--mode", opt.mode, "periodic | dirichlet-zero")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  for (CLI::App* sub : subs) {
    if (sub->parsed()) return run_command(sub->get_name(), opt, std::cout, std::cerr);
  }
  return kExitConfigError;
}
