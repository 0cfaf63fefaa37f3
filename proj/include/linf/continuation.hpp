#pragma once

#include "linf/lp_min.hpp"

#include <functional>
#include <vector>

namespace linf {

struct ContinuationSchedule {
    /// 0 selects max(2, ceil(1/c^3 + 1)).
    double p_start = 0.0;
    double p_max = 1024.0;
    double growth = 2.0;
    /// Stop once |e_next - e_prev| / max(e_prev, zero) drops below this; 0 disables.
    double stop_rel_e = 1e-3;
    /// Width of the boundary zone excluded from the dual drift; 0 selects 5h.
    double drift_r = 0.0;
};

/// The exponents a schedule visits before any early stop.
std::vector<double> schedule_exponents(const ContinuationSchedule& s, const FModel& model);

struct ContinuationStep {
    double p = 0.0;
    double e_p = 0.0;
    double maxF = 0.0;
    int iterations = 0;
    double grad_norm = 0.0;
    double grad_rel = 0.0;
    double grad_floor = 0.0;
    /// sup |f_p - f_prev| over evaluation nodes at distance >= drift_r; NaN on the first step.
    double f_drift = 0.0;
    Field u;
    Field f;
};

struct ContinuationTrace {
    std::vector<ContinuationStep> steps;
    double e_inf_estimate = 0.0;
    double aitken = 0.0;
    /// e_p nondecreasing along the steps to 1e-10 relative.
    bool monotone = true;
    /// Why the run ended before p_max ("", "zero_energy", "stagnation").
    std::string early_stop;

    const ContinuationStep& last() const { return steps.back(); }
};

using StepCallback = std::function<void(const ContinuationStep&)>;

/// Warm-started p-continuation from u0. Solver failures are rethrown as
/// SolverError naming the failing exponent.
ContinuationTrace run_continuation(const LpProblem& base, const ContinuationSchedule& schedule,
                                   const SolverConfig& solver = {}, const StepCallback& on_step = {});

struct EinfEstimate {
    double value = 0.0;
    /// Aitken extrapolant of the last three energies (equals value if undefined).
    double aitken = 0.0;
};

/// The last energy (a lower estimate since e_p increases) and the Aitken diagnostic.
EinfEstimate estimate_einf(const std::vector<double>& energies);
EinfEstimate estimate_einf(const ContinuationTrace& trace);

}  // namespace linf
