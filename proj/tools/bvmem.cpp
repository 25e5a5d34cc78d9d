// Apache License, Version 2.0, refer to LICENSE.txt

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bvmem/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"vector multiplicative error models with mixture innovations"};
  app.require_subcommand(1);

  std::string configPath;
  std::string outputDir;
  std::uint64_t seed = 0;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", configPath, "run configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--output", outputDir, "override the output directory");
  };
  add_common(app.add_subcommand("simulate", "draw a synthetic series"));
  add_common(app.add_subcommand("fit", "sample or optimize the posterior"));
  add_common(app.add_subcommand("evaluate", "score fitted models in sample"));
  add_common(app.add_subcommand("diagnose", "summarize a draw archive"));

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();

  try {
    bvmem::RunConfig config =
        bvmem::load_run_config(configPath, sub->get_name());
    if (sub->count("--seed") > 0) {
      config.seed = seed;
      config.sampler.seed = seed;
      config.baseline.seed = seed;
    }
    if (sub->count("--output") > 0) config.outputDir = outputDir;
    return bvmem::run_pipeline(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
