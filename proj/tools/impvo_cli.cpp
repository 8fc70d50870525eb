// Command-line driver: impvo_cli config.json [--output-dir DIR]

#include "impvo/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Impulsive Volterra control: solve, gradients, checks and optimization"};
  std::string config_path;
  std::string output_dir;
  bool list = false;
  app.add_option("config", config_path, "JSON run configuration");
  app.add_option("-o,--output-dir", output_dir, "override output_dir from the config");
  app.add_flag("--list-problems", list, "print built-in problems and their parameters");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? impvo::kExitOk : impvo::kExitValidation;
  }

  if (list) {
    for (const auto& name : impvo::problem_names()) {
      std::cout << name;
      for (const auto& [k, v] : impvo::problem_defaults(name)) std::cout << " " << k << "=" << v;
      std::cout << "\n";
    }
    return impvo::kExitOk;
  }
  if (config_path.empty()) {
    std::cerr << "missing config file\n" << app.help();
    return impvo::kExitValidation;
  }

  return impvo::run_file(config_path, output_dir, std::cout, std::cerr);
}
