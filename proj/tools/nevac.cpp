// nevac <subcommand> [--config path] [--key value]... input output

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "nevac/pipeline.hpp"

namespace {

struct Subcommand {
  const char* name;
  const char* help;
  nevac::PipelineReport (*run)(const nevac::PipelineConfig&, const std::string&, const std::string&);
};

const Subcommand kSubcommands[] = {
    {"continue", "continue Matsubara or tau data to a real-frequency spectral function", nevac::run_pipeline},
    {"fermionize", "write the auxiliary fermionic Matsubara data only", nevac::run_fermionize},
    {"bench", "sample the oracle model into INPUT, continue it into OUTPUT and print error metrics",
     nevac::run_bench},
    {"check", "validate INPUT and write the causality screening report", nevac::run_check},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytic continuation of Matsubara data via fermionization and Nevanlinna interpolation"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string input;
    std::string output;
    std::map<std::string, std::string> overrides;
  };
  std::map<std::string, Args> args;
  std::map<std::string, CLI::App*> apps;
  std::map<std::string, std::map<std::string, CLI::Option*>> key_options;

  for (const auto& sub : kSubcommands) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    Args& a = args[sub.name];
    cmd->add_option("--config", a.config, "key = value configuration file")->check(CLI::ExistingFile);
    for (const auto& key : nevac::PipelineConfig::keys()) {
      key_options[sub.name][key] = cmd->add_option("--" + key, a.overrides[key], "override " + key);
    }
    cmd->add_option("input", a.input, "input data file")->required();
    cmd->add_option("output", a.output, "output file")->required();
    apps[sub.name] = cmd;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : nevac::kExitFailure;
  }

  for (const auto& sub : kSubcommands) {
    if (!apps[sub.name]->parsed()) continue;
    const Args& a = args[sub.name];
    nevac::PipelineReport report;
    try {
      auto cfg = nevac::PipelineConfig::from_environment();
      if (!a.config.empty()) cfg.load_file(a.config);
      for (const auto& key : nevac::PipelineConfig::keys()) {
        if (key_options[sub.name][key]->count() > 0) cfg.set(key, a.overrides.at(key));
      }
      report = sub.run(cfg, a.input, a.output);
    } catch (const nevac::ParseError& e) {
      std::cerr << "nevac: " << e.what() << '\n';
      return nevac::kExitParseError;
    }
    std::cout << nevac::format_report(report);
    if (report.exit_code != nevac::kExitOk && !report.message.empty()) {
      std::cerr << "nevac: " << report.message << '\n';
    }
    return report.exit_code;
  }
  return nevac::kExitFailure;
}
