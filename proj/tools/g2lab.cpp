#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "g2lab/commands.hpp"

namespace {

using namespace g2lab::cli;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<std::string> format;
};

RunConfig load(const Options& opt, const std::string& command) {
  const std::string text = opt.config_path.empty() ? std::string() : read_file(opt.config_path);
  RunConfig config = parse_config(text, command);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.output) config.output_path = *opt.output;
  if (opt.format) config.format = *opt.format;
  validate(config);
  return config;
}

void summarize(const RunReport& report, const RunConfig& config) {
  std::cout << report.command << ": " << (report.pass() ? "PASS" : "FAIL") << " (" << report.checks.size()
            << " checks, config " << report.config_hash << ")\n";
  for (const auto& c : report.checks)
    if (!c.pass)
      std::cout << "  failed " << c.name << ": " << format_double(c.value) << " " << c.relation << " "
                << format_double(c.limit) << " does not hold\n";
  for (const auto& f : report.outputs) std::cout << "  wrote " << (std::filesystem::path(config.output_path) / f).string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearly parallel G2 structures with T3 symmetry: analysis and flow tools"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  Options opt;
  app.add_option("--config", opt.config_path, "key = value configuration file");
  app.add_option("--seed", opt.seed, "random seed (overrides the config)");
  app.add_option("--output", opt.output, "output directory (overrides the config)");
  app.add_option("--format", opt.format, "trajectory format: csv or json (overrides the config)");
  for (const auto& name : command_names()) app.add_subcommand(name, "run " + name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const CliError err = schema_error(e.what());
    std::cerr << error_json(err) << "\n";
    return err.exit_code();
  }

  std::string command;
  for (const auto* sub : app.get_subcommands()) command = sub->get_name();

  try {
    const RunConfig config = load(opt, command);
    const RunReport report = run(config);
    summarize(report, config);
    return exit_code(report);
  } catch (const CliError& e) {
    std::cerr << error_json(e) << "\n";
    return e.exit_code();
  }
}
