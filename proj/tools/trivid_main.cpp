/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "trivid/cli.hpp"

namespace {

struct CommandArgs {
  std::string config_path;
  trivid::cli::CliOptions options;
};

void add_command(CLI::App& app, const std::string& name,
                 const std::string& description, CommandArgs& args,
                 std::string* selected) {
  CLI::App* cmd = app.add_subcommand(name, description);
  cmd->add_option("--config,-c", args.config_path, "run config (JSON)")
      ->required();
  cmd->add_option("--out,-o", args.options.out_dir, "output directory");
  cmd->add_option("--seed", args.options.seed,
                  "override the config seed");
  cmd->add_flag("--quiet,-q", args.options.quiet,
                "suppress per-file progress lines");
  cmd->footer(trivid::cli::schema_help(*trivid::cli::find_schema(name)));
  cmd->callback([selected, name] { *selected = name; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trivid: synthetic video pipeline co-design toolkit"};
  app.require_subcommand(1);

  CommandArgs args;
  std::string selected;
  add_command(app, "synth", "generate synthetic tracking scenarios", args,
              &selected);
  add_command(app, "saliency", "build patch drop masks for a scenario", args,
              &selected);
  add_command(app, "temporal", "train the frame retention policy", args,
              &selected);
  add_command(app, "prune", "derive hardware-friendly weight masks", args,
              &selected);
  add_command(app, "simulate", "cost a multi-device pipeline", args,
              &selected);
  add_command(app, "report", "build the efficiency comparison table", args,
              &selected);
  add_command(app, "sweep", "evaluate tracking under swept drop ratios", args,
              &selected);

  CLI11_PARSE(app, argc, argv);

  try {
    trivid::Json config = trivid::cli::load_config(args.config_path);
    trivid::cli::run_command(selected, config, args.options);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return trivid::cli::exit_code_for(e);
  }
  return 0;
}
