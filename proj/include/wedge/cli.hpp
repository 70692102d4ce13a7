#pragma once

// Flat key = value configuration and the command pipelines behind the
// `wedge` executable. Exit codes: 0 success, 1 solver failure, 2 bad
// configuration, 3 diagnostic FAIL under --strict.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wedge/diagnostics.hpp"
#include "wedge/elliptic_fixer.hpp"
#include "wedge/unsteady_solver.hpp"
#include "wedge/wave_pattern.hpp"

namespace wedge::cli {

enum class Command { polar, pattern, simulate, elliptic, verify, sweep };

// Throws ConfigError("command") for unknown names.
Command parse_command(std::string_view name);
const char* to_string(Command c);

enum class DumpFormat { csv, raw, both };

struct Numerics {
  SimConfig sim;
  EllipticConfig elliptic;
  // Continuation starts here when a direct solve fails.
  double eps_start = kDefaultEpsilon;
  std::vector<double> epsilons{0.04, 0.01, 0.0025};
  std::vector<int> resolutions{65};
  int polar_points = 2001;
  DiagnosticOptions diagnostics;
};

struct OutputOptions {
  std::filesystem::path dir = ".";
  DumpFormat format = DumpFormat::csv;
  // Stored node CSV for verify; defaults to dir / elliptic_nodes.csv.
  std::optional<std::filesystem::path> solution;
};

struct RunConfig {
  std::optional<Command> command;
  ProblemConfig problem;
  Numerics numerics;
  OutputOptions output;
  bool strict = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolver = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiagnostic = 3;

// Unknown keys, duplicates and malformed values throw ConfigError naming the
// key. A line may hold several assignments separated by commas.
RunConfig parse_config_text(std::string_view text);
// Throws ConfigError("config") when the file cannot be read.
RunConfig parse_config_file(const std::filesystem::path& path);
// Range checks on every field; requires a command.
void validate(const RunConfig& config);

// Runs the pipeline and writes its artifacts into config.output.dir.
// Solver exceptions propagate; run_main maps them to exit codes.
int dispatch(const RunConfig& config, std::ostream& log);

// Worker count for sweep: WEDGE_THREADS when set, else hardware concurrency.
unsigned worker_count(std::size_t tasks);

// Full command line: wedge <command> --config FILE [--strict] [--out DIR].
int run_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace wedge::cli
