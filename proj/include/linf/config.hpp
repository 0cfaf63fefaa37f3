#pragma once

#include "linf/continuation.hpp"
#include "linf/expr.hpp"
#include "linf/fmodel.hpp"
#include "linf/grid.hpp"
#include "linf/lp_min.hpp"
#include "linf/structure.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace linf {

/// Parsed run configuration. Built from a flat `key = value` file with `#`
/// comments; unknown keys are rejected.
struct RunConfig {
    std::string source;

    // domain
    DomainKind kind = DomainKind::interval;
    double a = 0.0;
    double b = 1.0;
    double x0 = 0.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;
    Point center{};
    double radius = 1.0;
    int n = 0;

    // model
    std::string model_name;
    double epsilon = 0.5;
    double c = 1.0;
    std::string a_expr;

    // boundary datum
    std::string u0_expr;
    std::string u0_file;

    ContinuationSchedule schedule;
    SolverConfig solver;

    double tau = 1e-2;
    int probe_count = 0;
    std::uint64_t seed = 1;
    double probe_p = 128.0;
    double probe_tol_abs = 1e-2;
    double probe_tol_rel = 1e-2;
    std::vector<ProbeBox> probe_boxes;
    int fit_degree = 3;
    double interior_r = 0.0;
    double pairing_epsilon = 0.1;

    double smooth_epsilon = 0.1;

    std::string output_dir = "linf_out";
    bool snapshots = false;

    /// key = value lines as read, in file order, for config.echo.
    std::vector<std::pair<std::string, std::string>> entries;

    DomainPtr make_domain() const;
    FModel make_model() const;
    Field make_u0(const DomainPtr& domain) const;
    ProbeConfig probe_config() const;
    StructureOptions structure_options() const;
};

/// Parses a configuration file. Throws ConfigError on unknown or malformed
/// keys, missing required keys (domain.kind, domain.n, model.name and one of
/// boundary.u0 / boundary.file) and n < 24.
RunConfig parse_config(const std::string& path);

/// Same as parse_config on in-memory text; `origin` names it in error messages.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

/// All accepted keys, for usage text.
const std::vector<std::string>& config_keys();

}  // namespace linf
