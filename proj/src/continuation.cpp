#include "linf/continuation.hpp"

#include "linf/error.hpp"
#include "linf/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace linf {

std::vector<double> schedule_exponents(const ContinuationSchedule& s, const FModel& model)
{
    const double p0 = std::max(2.0, std::ceil(model.convexity_exponent() - 1e-12));
    const double start = s.p_start > 0.0 ? s.p_start : p0;
    if (start < model.convexity_exponent() * (1.0 - 1e-12) || start < 2.0 * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "continuation: p_start = " << start << " is below the convexity exponent " << convex_exponent(model);
        throw ConfigError(msg.str());
    }
    if (!(s.growth > 1.0)) throw ConfigError("continuation: growth factor must exceed 1");
    if (!(s.p_max >= start)) throw ConfigError("continuation: p_max must be >= p_start");
    std::vector<double> ps{start};
    while (ps.back() < s.p_max) ps.push_back(std::min(ps.back() * s.growth, s.p_max));
    return ps;
}

ContinuationTrace run_continuation(const LpProblem& base, const ContinuationSchedule& schedule,
                                   const SolverConfig& solver, const StepCallback& on_step)
{
    const std::vector<double> ps = schedule_exponents(schedule, base.model);
    const GridDomain& g = *base.domain;
    const double drift_r = schedule.drift_r > 0.0 ? schedule.drift_r : 5.0 * g.h();
    const double zero = base.zero_threshold();

    ContinuationTrace trace;
    LpProblem problem = base;
    Field warm = base.u0;
    for (const double p : ps) {
        problem.p = p;
        LpSolution sol;
        try {
            sol = minimize(problem, warm, solver);
        } catch (const SolverError& e) {
            std::ostringstream msg;
            msg << "continuation failed at p = " << p << ": " << e.what();
            throw SolverError(msg.str());
        }
        ContinuationStep step;
        step.p = p;
        step.e_p = sol.e_p;
        step.maxF = sol.maxF;
        step.iterations = sol.iterations;
        step.grad_norm = sol.grad_norm;
        step.grad_rel = sol.grad_rel;
        step.grad_floor = sol.grad_floor;
        step.f_drift = std::numeric_limits<double>::quiet_NaN();
        if (!trace.steps.empty()) {
            const Field& prev = trace.steps.back().f;
            double d = 0.0;
            for (const std::size_t k : g.eval_nodes())
                if (g.distance_at(k) >= drift_r) d = std::max(d, std::abs(sol.f.values[k] - prev.values[k]));
            step.f_drift = d;
        }
        step.u = sol.u;
        step.f = std::move(sol.f);
        warm = step.u;
        log::info("p=%-6g e_p=%.12g iterations=%d grad_rel=%.2e", p, step.e_p, step.iterations, step.grad_rel);

        const double e_prev = trace.steps.empty() ? 0.0 : trace.steps.back().e_p;
        const bool have_prev = !trace.steps.empty();
        if (have_prev && step.e_p < e_prev * (1.0 - 1e-10) - zero) trace.monotone = false;
        trace.steps.push_back(std::move(step));
        if (on_step) on_step(trace.steps.back());

        const double e = trace.steps.back().e_p;
        if (!(e > zero)) {
            trace.early_stop = "zero_energy";
            break;
        }
        if (have_prev && schedule.stop_rel_e > 0.0 && p < ps.back() &&
            std::abs(e - e_prev) / std::max(e_prev, zero) < schedule.stop_rel_e) {
            trace.early_stop = "stagnation";
            break;
        }
    }
    const EinfEstimate est = estimate_einf(trace);
    trace.e_inf_estimate = est.value;
    trace.aitken = est.aitken;
    return trace;
}

EinfEstimate estimate_einf(const std::vector<double>& e)
{
    if (e.empty()) throw DegenerateError("estimate_einf: empty trace");
    EinfEstimate est;
    est.value = e.back();
    est.aitken = e.back();
    if (e.size() >= 3) {
        const double e0 = e[e.size() - 3];
        const double e1 = e[e.size() - 2];
        const double e2 = e[e.size() - 1];
        const double d1 = e1 - e0;
        const double d2 = e2 - e1;
        const double den = d2 - d1;
        if (std::abs(den) > 1e-14 * std::max(1.0, std::abs(e2))) est.aitken = e2 - d2 * d2 / den;
    }
    return est;
}

EinfEstimate estimate_einf(const ContinuationTrace& trace)
{
    std::vector<double> e;
    for (const auto& s : trace.steps) e.push_back(s.e_p);
    return estimate_einf(e);
}

}  // namespace linf
