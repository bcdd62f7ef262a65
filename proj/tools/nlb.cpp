// Command-line entry point: nlb <solve|sweep|symbol|diagnose|check> --config PATH
#include <cstdlib>
#include <iostream>
#include <utility>

#include <CLI11.hpp>

#include "nlbellman/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Concave nonlocal Bellman equations: solve, sweep, symbol, diagnose, check"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides NLB_OUTPUT_DIR and the config)");
    sub->add_option("--seed", seed, "RNG seed for randomized checks");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  };
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Solve the exterior Dirichlet problem by policy iteration"},
      {"sweep", "Solve and diagnose the problem at every sigma in sigma_list"},
      {"symbol", "Sample the Fourier symbol of each kernel and fit its growth"},
      {"diagnose", "Absolute mass, P/N and Hoelder diagnostics of a solution"},
      {"check", "Run the property suite; exits 1 if any criterion fails"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommand(command);

  try {
    nlb::ScenarioConfig config = nlb::ScenarioConfig::load(config_path);
    config.command = command;
    if (const char* env = std::getenv("NLB_OUTPUT_DIR"); env && *env) config.output_dir = env;
    if (sub->count("--out")) config.output_dir = out_dir;
    if (sub->count("--seed")) config.seed = seed;
    if (sub->count("--threads")) config.threads = threads;

    const nlb::ScenarioOutcome outcome = nlb::run_scenario(config);
    nlohmann::json report = {{"command", command},
                             {"config_hash", config.hash()},
                             {"exit_code", outcome.exit_code},
                             {"summary", outcome.summary},
                             {"artifacts", outcome.artifacts}};
    std::cout << report.dump(2) << std::endl;
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cout << nlb::error_json(e).dump(2) << std::endl;
    return nlb::exit_code_for(e);
  }
}
