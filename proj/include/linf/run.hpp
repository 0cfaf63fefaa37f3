#pragma once

#include "linf/config.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace linf {

/// Process exit codes of the command line front end.
enum ExitCode : int {
    exit_ok = 0,
    /// a recorded invariant check failed
    exit_check_failed = 1,
    /// the minimality probe found a subdomain with lower energy
    exit_non_minimal = 2,
    exit_solver_failure = 3,
    exit_config_error = 4,
};

struct CommandResult {
    int exit_code = exit_ok;
    nlohmann::json report;
};

/// Samples the model assumptions and their consequences over the domain box.
CommandResult cmd_check_model(const RunConfig& cfg);

/// Continuation, structure analysis, oracle comparison (1D) and persistence
/// into cfg.output_dir.
CommandResult cmd_solve(const RunConfig& cfg);

/// 1D oracle for the clamped data of u0.
CommandResult cmd_oracle(const RunConfig& cfg);

/// Structure analysis of a stored field at exponent p (0 selects continuation.p_max).
CommandResult cmd_analyze(const RunConfig& cfg, const std::string& solution_path, double p = 0.0);

/// Minimality probe of a stored field, or of u0 when the path is empty.
CommandResult cmd_probe(const RunConfig& cfg, const std::string& solution_path);

/// Boundary-zone smoothing of u0; epsilon defaults to smooth.epsilon.
CommandResult cmd_smooth(const RunConfig& cfg, std::optional<double> epsilon = {});

/// Runs `fn`, mapping ConfigError to exit 4 and solver or model failures to
/// exit 3. The error message is stored under "error".
CommandResult guarded(const std::function<CommandResult()>& fn);

/// Data (u(a), u'(a), u(b), u'(b)) of the boundary datum on an interval grid.
std::array<double, 4> clamped_data_1d(const RunConfig& cfg, const Field& u0);

}  // namespace linf
