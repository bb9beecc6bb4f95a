#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "betagas/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

void add_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "experiment config (JSON)")->required();
  cmd->add_option("--seed", flags.seed, "overrides the config seed");
  cmd->add_option("--threads", flags.threads, "worker threads, 0 for all cores");
  cmd->add_option("--out", flags.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and verification runs for 2D Coulomb gases", "betagas"};
  app.set_version_flag("--version", betagas::version_string());
  app.require_subcommand(1);

  Flags flags;
  app.add_subcommand("run", "run the experiment named by the config's kind");
  for (const auto& k : betagas::experiment_kinds()) app.add_subcommand(k, "run a " + k + " experiment");
  for (auto* sub : app.get_subcommands({})) add_flags(sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : betagas::exit_config;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  betagas::Overrides overrides;
  if (name != "run") overrides.kind = name;
  overrides.seed = flags.seed;
  overrides.threads = flags.threads;
  if (flags.out) overrides.out_dir = *flags.out;
  return betagas::run_from_file(flags.config, overrides, std::cout, std::cerr);
}
