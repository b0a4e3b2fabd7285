#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  using namespace raytomo::cli;

  CLI::App app{"Ray-based time-of-flight tomography and fish-eye validation"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  FlagOverrides flags;
  const std::pair<std::string_view, const char*> commands[] = {
      {"validate-fisheye", "radius and acoustic-length sweeps in the fish-eye lens"},
      {"trace", "trace one ray and dump its trajectory"},
      {"link", "link one emitter/receiver pair or the full array"},
      {"synth", "rasterise a phantom and synthesise travel times"},
      {"reconstruct", "invert travel times for sound speed"},
      {"greens", "ray Green's-function parameters along linked rays"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(std::string(name), description);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--out", flags.out, "output directory (overrides the config)");
    sub->add_option("--seed", flags.seed, "noise seed (overrides the config)");
    sub->add_option("--threads", flags.threads, "worker threads, 0 for all cores (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig cfg;
  try {
    std::optional<std::filesystem::path> path;
    if (config_path) path = *config_path;
    cfg = load_config(command, path, flags);
  } catch (const ConfigError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitConfig;
  }
  return run(cfg, std::cout, std::cerr);
}
