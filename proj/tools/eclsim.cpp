// eclsim: deterministic federated-learning simulator with per-client
// multi-expert personalization. Subcommands: partition | train | eval |
// report. Exit codes: 0 success, 1 usage/config error, 2 runtime error.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecl/cli/commands.hpp"
#include "ecl/cli/config.hpp"

namespace {

struct CommonArgs {
  std::string config_file;
  std::string output_dir;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_file, "JSON config file (defaults apply when omitted)");
  cmd->add_option("-o,--out", args.output_dir, "output directory (overrides config)");
  cmd->add_option("-s,--set", args.overrides,
                  "override a config key by dotted path, e.g. --set phase2.lambda=0.25");
}

ecl::cli::ExperimentConfig make_config(const CommonArgs& args) {
  std::vector<std::string> overrides = args.overrides;
  if (!args.output_dir.empty()) overrides.push_back("output_dir=" + args.output_dir);
  std::optional<std::filesystem::path> file;
  if (!args.config_file.empty()) file = args.config_file;
  return ecl::cli::parse_config(file, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eclsim: two-phase federated simulation on heterogeneous long-tailed data"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* partition = app.add_subcommand("partition", "shape the dataset and emit partition stats");
  CLI::App* train = app.add_subcommand("train", "run Phase I + Phase II and write checkpoints");
  CLI::App* eval = app.add_subcommand("eval", "evaluate checkpoints and emit metrics");
  CLI::App* report = app.add_subcommand("report", "rebuild summary.json from metrics.csv");
  for (CLI::App* cmd : {partition, train, eval, report}) add_common(cmd, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const ecl::cli::ExperimentConfig config = make_config(args);
    if (partition->parsed()) {
      ecl::cli::cmd_partition(config);
    } else if (train->parsed()) {
      ecl::cli::cmd_train(config);
    } else if (eval->parsed()) {
      ecl::cli::cmd_eval(config);
    } else if (report->parsed()) {
      ecl::cli::cmd_report(config);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
