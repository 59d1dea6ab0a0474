#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "magbloch/io/config.hpp"

namespace magbloch::io {

enum class Command { algebra_check, bands, flatness, perturb, butterfly, nodal };

std::optional<Command> parse_command(std::string_view name);
std::string_view to_string(Command command);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  int threads = 1;
  bool quiet = false;
  std::ostream* summary = nullptr;   // one-line result; may be null
  std::ostream* progress = nullptr;  // diagnostic stream; silent when quiet or null
};

struct RunResult {
  std::vector<std::filesystem::path> files;
  std::string summary;
  bool ok = true;
};

/// Runs one command. Outputs are deterministic for a given configuration and
/// every file carries the config hash and tool version. Failures throw
/// magbloch::Error; no partially written file is left behind.
RunResult run_command(Command command, const RunConfig& cfg, const RunOptions& options);

/// Machine-readable failure record, one line of JSON.
std::string error_record(std::string_view kind, std::string_view message);

}  // namespace magbloch::io
