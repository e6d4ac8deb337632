#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pathclosure/config.hpp"
#include "pathclosure/runner.hpp"
#include "pathclosure/version.hpp"

namespace {

int run(const std::string& subcommand, const std::string& config_path,
        const std::string& out_dir, bool seed_set, std::uint64_t seed) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot read config file '" << config_path << "'\n";
    return pathclosure::runner::kExitValidation;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  auto parsed = pathclosure::config::parse_config(text);
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors) {
      std::cerr << config_path << ":" << e.line << ": " << e.message << "\n";
    }
    return pathclosure::runner::kExitValidation;
  }
  if (seed_set) parsed.config.seed = seed;

  const auto result =
      pathclosure::runner::run_subcommand(subcommand, parsed.config, text, out_dir);
  for (const auto& f : result.files) {
    std::cout << "wrote " << out_dir << "/" << f << "\n";
  }
  if (!result.message.empty()) {
    (result.exit_code == 0 ? std::cout : std::cerr) << result.message << "\n";
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"path-integral closure toolkit"};
  app.set_version_flag("--version", std::string(pathclosure::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;

  std::vector<CLI::App*> subs;
  for (const auto& name : pathclosure::runner::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, "");
    sub->add_option("config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed override")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) {
      return run(pathclosure::runner::subcommands()[i], config_path, out_dir,
                 seed_set, seed);
    }
  }
  std::cerr << "error: no subcommand\n";
  return pathclosure::runner::kExitValidation;
}
