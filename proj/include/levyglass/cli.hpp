#ifndef LEVYGLASS_CLI_HPP
#define LEVYGLASS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "levyglass/experiments.hpp"

namespace levyglass {

// Exit code contract: 0 all checks pass, 1 any check fails, 2 usage error,
// 3 I/O error.
enum ExitCode : int {
    exit_ok = 0,
    exit_fail = 1,
    exit_usage = 2,
    exit_io = 3,
};

struct CliInvocation {
    std::string subcommand;
    ExperimentConfig config;
    ModelKind model_kind = ModelKind::full;  // free-energy only
    std::string instance_path;               // exact only
    std::string format = "csv";
    std::string out_path;                    // empty -> stdout
};

struct ParseResult {
    bool ok = false;
    int exit_code = exit_ok;  // meaningful when !ok (help or usage error)
    CliInvocation invocation;
    std::string message;
};

ParseResult parse_cli(const std::vector<std::string>& args);

// Dispatch a parsed invocation: prints the resolved configuration to
// `console`, writes the report, returns the exit code.
int run_invocation(const CliInvocation& invocation, std::ostream& console,
                   std::ostream& errors);

int run_cli(int argc, const char* const* argv);

}  // namespace levyglass

#endif
