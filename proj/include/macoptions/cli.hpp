#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "macoptions/harness.hpp"

namespace macopt {

/// Bad command line. The message starts with the offending flag.
class UsageError : public std::runtime_error {
 public:
  UsageError(std::string flag, const std::string& what)
      : std::runtime_error(flag.empty() ? what : flag + ": " + what), flag_(std::move(flag)) {}
  const std::string& flag() const { return flag_; }

 private:
  std::string flag_;
};

struct TrainCommand {
  RunConfig run;
};
struct EvalCommand {
  std::filesystem::path qtable;
  RunConfig run;
};
struct CompareMethodsCommand {
  RunConfig run;
};
struct ComparePlannerCommand {
  RunConfig run;
};
struct OracleCommand {
  GridConfig grid;
  Subtask subtask = Subtask::Pickup;
  double gamma = 0.95;
  std::filesystem::path output;
};
struct HelpCommand {
  std::string text;
};

using CliCommand =
    std::variant<TrainCommand, EvalCommand, CompareMethodsCommand, ComparePlannerCommand, OracleCommand, HelpCommand>;

/// Flat key=value settings plus the optional [layout] section, as read from a
/// config file. Keys mirror the long flag names without dashes.
struct Settings {
  std::map<std::string, std::string> values;
  std::map<std::string, std::string> layout;
};

/// Throws FileError when unreadable, ParseError (with line) when malformed.
Settings read_config_file(const std::filesystem::path& path);

/// Resolved configuration in config-file syntax; read_config_file accepts it back.
std::string render_config(const RunConfig& run);

/// Turns settings into a validated run configuration. Throws UsageError naming the flag.
RunConfig resolve_run_config(const Settings& settings);

/// argv[0] is the program name.
CliCommand parse_args(const std::vector<std::string>& argv);

/// Executes a parsed command, writing its files and a short report to `out`.
void execute(const CliCommand& command, std::ostream& out);

/// parse_args + execute. Returns the process exit code; diagnostics go to `err` as one line.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace macopt
