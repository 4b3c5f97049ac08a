#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sbridge/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Density steering with channel mismatch: solve, verify and diagnose"};
  app.require_subcommand(1);
  app.fallthrough();

  sbridge::cli::Options opt;
  std::string output;
  int stride = 0;
  app.add_option("--output", output, "Output directory (overrides output.directory)");
  app.add_option("--stride", stride, "Trajectory buffer stride (overrides solver.buffer_stride)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--continuation", opt.continuation, "Solve a mismatch ramp, warm-starting each stage");

  std::string config, dir;
  CLI::App* solve = app.add_subcommand("solve", "Run the Sinkhorn iteration and write the solution");
  solve->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  CLI::App* verify = app.add_subcommand("verify", "Simulate the controlled SDE under a solved policy");
  verify->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  verify->add_option("dir", dir, "Solve output directory")->required()->check(CLI::ExistingDirectory);
  CLI::App* diagnose = app.add_subcommand("diagnose", "Write reaction diagnostics and the validation report");
  diagnose->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  diagnose->add_option("dir", dir, "Solve output directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sbridge::cli::kRuntimeError;
  }
  if (!output.empty()) opt.output = output;
  if (stride > 0) opt.stride = stride;

  if (*solve) return sbridge::cli::solve(config, opt, std::cout, std::cerr);
  if (*verify) return sbridge::cli::verify(config, dir, opt, std::cout, std::cerr);
  return sbridge::cli::diagnose(config, dir, opt, std::cout, std::cerr);
}
