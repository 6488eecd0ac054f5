// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <iostream>
#include "slabsolve/experiments.hpp"

using namespace slabsolve;

namespace
{

int execute(ExperimentConfig cfg, int threads)
{
  if (threads > 0)
  {
    cfg.threads = threads;
  }
  std::cout << "experiment " << cfg.experiment << " (" << cfg.problem << ", " << to_string(cfg.backend)
            << ", N_ds " << cfg.n << ")\n";
  const ExperimentOutput out = run_experiment(cfg);
  for (const auto &line : out.summary)
  {
    std::cout << "  " << line << "\n";
  }
  for (const auto &f : write_outputs(out, cfg.experiment, cfg.output_dir))
  {
    std::cout << "wrote " << f << "\n";
  }
  if (!out.ok)
  {
    std::cerr << "error: GMRES did not converge within gmres.max_iter\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"slab-decomposition equilibrium solver experiments"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap on worker threads")->check(CLI::PositiveNumber);

  std::string config_path;
  auto *run = app.add_subcommand("run", "run an experiment config file");
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  std::vector<std::string> run_overrides;
  run->add_option("--override", run_overrides, "section.key=value, repeatable");

  std::string preset;
  std::vector<std::string> overrides;
  auto *pre = app.add_subcommand("preset", "run a shipped preset");
  pre->add_option("name", preset, "preset name")->required();
  pre->add_option("--override", overrides, "section.key=value, repeatable");

  auto *list = app.add_subcommand("list-presets", "list shipped presets");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (*list)
    {
      for (const auto &name : list_presets())
      {
        std::cout << name << "\n";
      }
      return 0;
    }
    if (*run)
    {
      return execute(load_config(config_path, run_overrides), threads);
    }
    return execute(load_preset(preset, overrides), threads);
  }
  catch (const ConfigError &e)
  {
    std::cerr << e.what() << "\n";
    return 3;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
