#ifndef ROBUSTDX_CLI_HPP
#define ROBUSTDX_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "robustdx/report.hpp"
#include "robustdx/scenario.hpp"

namespace robustdx {

/// Exit codes shared by every subcommand.
inline constexpr int kExitPass = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitCertificationFailure = 2;

struct CommandFlags {
  std::optional<std::uint64_t> seed;
  std::optional<long> budget;
};

struct CommandResult {
  ReportRecord record;
  int exit_code = kExitPass;
  std::string summary;
  std::string csv;  ///< robust-eval only
};

/// Runs one of "verify-lemma", "optimize", "worst-case", "robust-eval" on a
/// parsed scenario. Input problems surface as Error(InvalidArgument).
[[nodiscard]] CommandResult execute_command(const std::string& command, const Scenario& scenario,
                                            const CommandFlags& flags);

/// Full command line front end; `argv[0]` is the program name.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robustdx

#endif  // ROBUSTDX_CLI_HPP
