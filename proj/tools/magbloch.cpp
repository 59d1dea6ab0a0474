#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "magbloch/error.hpp"
#include "magbloch/io/commands.hpp"
#include "magbloch/io/config.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int fail(magbloch::ErrorKind kind, const std::string& message) {
  std::cerr << magbloch::io::error_record(magbloch::to_string(kind), message) << "\n";
  return kind == magbloch::ErrorKind::config ? kExitUsage : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace magbloch;

  CLI::App app{"Magnetic Bloch band solver for periodic potentials at rational flux"};
  app.require_subcommand(1);

  std::string config_path;
  io::RunOptions options;
  std::string out_dir = ".";
  const std::pair<const char*, const char*> commands[] = {
      {"algebra-check", "check magnetic translation identities numerically"},
      {"bands", "sweep the quasi-momentum grid and write band energies"},
      {"flatness", "bands plus a flat/dispersive verdict per band"},
      {"perturb", "follow degenerate levels under V + tU and test genericity of dispersion"},
      {"butterfly", "lowest bands across a list of flux fractions"},
      {"nodal", "zero set of a Bloch eigenfunction at one quasi-momentum"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("-c,--config", config_path, "JSON run configuration (comments allowed)")->required();
    sub->add_option("-o,--out-dir", out_dir, "directory for output files");
    sub->add_option("-j,--threads", options.threads, "worker threads for θ sweeps")->check(CLI::PositiveNumber);
    sub->add_flag("-q,--quiet", options.quiet, "suppress progress lines");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << io::error_record("usage", e.what()) << "\n";
    return kExitUsage;
  }

  const auto command = io::parse_command(app.get_subcommands().front()->get_name());
  options.out_dir = out_dir;
  options.summary = &std::cout;
  options.progress = &std::cerr;

  try {
    const io::RunConfig cfg = io::load_config(config_path);
    const io::RunResult result = io::run_command(*command, cfg, options);
    return result.ok ? 0 : kExitRuntime;
  } catch (const io::ConfigError& e) {
    return fail(ErrorKind::config, e.what());
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    std::cerr << io::error_record("internal", e.what()) << "\n";
    return kExitRuntime;
  }
}
