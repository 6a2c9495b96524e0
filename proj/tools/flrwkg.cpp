#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "flrwkg/cli.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw flrwkg::ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flrwkg: Klein-Gordon on FLRW backgrounds"};
  app.set_version_flag("--version", std::string(flrwkg::kVersion));
  app.require_subcommand(1);

  std::string config, out, suite = "energy";
  bool quiet = false;
  auto add = [&](const std::string& name, const std::string& help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("config", config, "INI scenario file")->required();
    s->add_option("--out", out, "output directory (default $FLRWKG_OUTPUT_ROOT/run.output_dir)");
    s->add_flag("-q,--quiet", quiet, "suppress the console summary");
    return s;
  };
  auto* check = add("check", "check the structural conditions of a scenario");
  auto* lifespan = add("lifespan", "lifespan lower bound for given data size");
  auto* simulate = add("simulate", "evolve the field equation on the torus");
  auto* verify = add("verify", "run a numerical verification suite");
  verify->add_option("--suite", suite, "energy, gn, estimate or picard")
      ->check(CLI::IsMember({"energy", "gn", "estimate", "picard"}));
  auto* sweep = add("sweep", "run check or lifespan over a parameter grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : flrwkg::kExitConfig;
  }

  return flrwkg::guarded(
      [&]() -> int {
        const auto text = read_file(config);
        const auto tree = flrwkg::parse_config_tree(text, config);
        flrwkg::RunConfig c;
        try {
          c = flrwkg::config_from_tree(tree);
        } catch (const flrwkg::ConfigError& e) {
          throw flrwkg::ConfigError(config + ": " + e.what());
        }
        flrwkg::CommandContext ctx;
        ctx.out_dir = flrwkg::resolve_output_dir(c, out);
        ctx.quiet = quiet;
        if (*check) return flrwkg::cmd_check(c, ctx);
        if (*lifespan) return flrwkg::cmd_lifespan(c, ctx);
        if (*simulate) return flrwkg::cmd_simulate(c, ctx);
        if (*verify) return flrwkg::cmd_verify(c, suite, ctx);
        if (*sweep) return flrwkg::cmd_sweep(tree, c, ctx);
        return flrwkg::kExitConfig;
      },
      std::cerr);
}
