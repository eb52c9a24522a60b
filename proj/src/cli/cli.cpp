#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "obsgram/cli.hpp"
#include "obsgram/errors.hpp"

namespace obsgram {

int run_cli(int argc, char** argv) {
  CLI::App app{"Stochastic empirical observability Gramians and sensor placement"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  for (const char* name : {"simulate", "gramian", "metrics-heatmap", "sweep", "place"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--spec", spec_path, "flat JSON spec file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const Experiment experiment = parse_experiment(app.get_subcommands().front()->get_name());
    std::ifstream in(spec_path);
    if (!in) throw ConfigError("cannot read spec file " + spec_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("spec is not valid JSON: ") + e.what());
    }
    const RunSpec spec = parse_spec(doc, experiment, seed);
    run_experiment(spec, out_dir, threads);
  } catch (const ConfigError& e) {
    std::cerr << "obsgram: invalid spec: " << e.what() << '\n';
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "obsgram: simulation diverged at step " << e.step() << ": "
              << e.what() << '\n';
    return 3;
  } catch (const BudgetError& e) {
    std::cerr << "obsgram: budget exceeded: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "obsgram: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace obsgram
