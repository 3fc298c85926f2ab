#include <CLI11.hpp>
#include <iostream>

#include "experiments.hpp"

int main(int argc, char** argv) {
  using namespace kpi::cli;
  CLI::App app{"KP-I simulation, dyadic norms and estimate sweeps"};
  app.require_subcommand(1);
  CommandOptions opts;
  std::uint64_t seed = 0;
  for (int i = 0; i < 6; ++i) {
    const auto command = static_cast<Command>(i);
    auto* sub = app.add_subcommand(to_string(command));
    sub->add_option("--config", opts.config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "result directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the config seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  Command command = Command::run;
  for (int i = 0; i < 6; ++i)
    if (app.got_subcommand(to_string(static_cast<Command>(i)))) command = static_cast<Command>(i);
  const auto* sub = app.get_subcommand(to_string(command));
  if (sub->count("--seed") > 0) opts.seed = seed;
  try {
    opts.threads = threads_from_env();
  } catch (const kpi::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return execute(command, opts, std::cerr);
}
