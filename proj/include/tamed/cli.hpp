#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tamed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitInvariant = 3;

/// Bad command line or config file. `exit_code` is 0 for --help.
class UsageError : public std::runtime_error {
public:
    UsageError(const std::string& what, int exit_code = kExitUsage)
        : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

struct RunConfig {
    std::string subcommand;  // simulate, convergence, moments, dominator-check, benchmark, dimension-scan
    std::string problem;
    std::vector<std::string> schemes;
    std::vector<std::size_t> steps_list;  // --N (single) or --Ns
    std::optional<std::size_t> ref_steps;
    std::optional<std::size_t> paths;
    double order_p = 2.0;
    std::uint64_t seed = 0;
    std::vector<int> dims;
    std::string out_path;  // empty: CSV to stdout
    bool emit_plot = false;
    unsigned threads = 0;
};

const std::vector<std::string>& subcommands();

/// Parses argv (argv[0] is the program name). Flags may also be given in a
/// flat `key=value` file passed with --config; the command line wins.
RunConfig parse_args(int argc, const char* const* argv);
RunConfig parse_args(const std::vector<std::string>& args);

/// Executes the configuration. CSV goes to config.out_path (or `out` when no
/// path is set); a one-line summary goes to `log`. Returns the exit code:
/// 0 success, 1 usage, 2 numeric or solver failure, 3 invariant violation.
int run(const RunConfig& config, std::ostream& out, std::ostream& log);

}  // namespace tamed::cli
