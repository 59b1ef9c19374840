// longeval: build long-context QA benchmarks from books and rank answering
// systems with LLM raters.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "longeval/config.hpp"
#include "longeval/errors.hpp"
#include "longeval/orchestrator.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<std::string> run_id;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> backend_overrides;  // from=to
};

longeval::Runner make_runner(const GlobalArgs& args) {
  longeval::LoadedConfig loaded = longeval::load_config(args.config_path);
  longeval::Runner::Overrides overrides;
  overrides.run_id = args.run_id;
  overrides.seed = args.seed;
  for (const std::string& mapping : args.backend_overrides) {
    const auto eq = mapping.find('=');
    if (eq == std::string::npos) {
      throw longeval::ConfigError(
          "--backend-override expects <declared>=<replacement>: " + mapping);
    }
    overrides.backends[mapping.substr(0, eq)] = mapping.substr(eq + 1);
  }
  return longeval::Runner(std::move(loaded), std::move(overrides));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "longeval: automatic book QA benchmark construction and LLM-rater "
      "evaluation"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "Path to the run config file")
      ->required();
  std::string run_id_flag, stage_flag;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  app.add_option("--run-id", run_id_flag, "Override the config run id");
  app.add_option("--seed", seed_flag, "Override the config seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--backend-override", args.backend_overrides,
                 "Replace a declared backend, format <declared>=<replacement> "
                 "(repeatable)");

  // One subcommand per pipeline stage, plus `run` for the whole pipeline.
  std::map<std::string, CLI::App*> stage_commands;
  for (const std::string& stage : longeval::Runner::stage_names()) {
    stage_commands[stage] =
        app.add_subcommand(stage, "Run the " + stage + " stage");
  }
  CLI::App* run_cmd =
      app.add_subcommand("run", "Run every applicable stage in order");
  run_cmd->add_option("--stage", stage_flag,
                      "Run only this stage instead of the full pipeline");

  CLI11_PARSE(app, argc, argv);
  if (!run_id_flag.empty()) args.run_id = run_id_flag;
  if (seed_set) args.seed = seed_flag;

  try {
    longeval::Runner runner = make_runner(args);
    if (run_cmd->parsed()) {
      if (!stage_flag.empty()) {
        runner.run_stage(stage_flag);
      } else {
        runner.run_all();
      }
    } else {
      for (const auto& [stage, cmd] : stage_commands) {
        if (cmd->parsed()) runner.run_stage(stage);
      }
    }
    std::cout << "artifacts: " << runner.run_dir().string() << "\n";
    return 0;
  } catch (const longeval::ArtifactError& e) {
    std::cerr << "error (stage " << e.stage() << "): " << e.what() << "\n";
    return 2;
  } catch (const longeval::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
