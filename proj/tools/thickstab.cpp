#include "thickstab/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"thickstab: stabilization and observability experiments on the periodic torus"};
  app.require_subcommand(1);

  bool as_json = false;
  auto* list = app.add_subcommand("list", "list scenarios");
  list->add_flag("--json", as_json, "machine-readable output");

  thickstab::RunRequest req;
  for (const auto& info : thickstab::scenario_catalog()) {
    auto* sub = app.add_subcommand(info.name, info.summary);
    sub->add_option("--config", req.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", req.overrides, "override a key, section.key=value");
    sub->add_option("--out", req.out_dir, "output directory")->required();
    sub->callback([&req, name = info.name] { req.scenario = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : thickstab::kExitValidation;
  }
  if (list->parsed()) {
    std::cout << thickstab::list_scenarios(as_json);
    return thickstab::kExitOk;
  }
  return thickstab::run_scenario(req, std::cout, std::cerr);
}
