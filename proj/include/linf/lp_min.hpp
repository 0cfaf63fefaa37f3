#pragma once

#include "linf/fmodel.hpp"
#include "linf/grid.hpp"

#include <functional>
#include <span>

namespace linf {

/// Discrete L^p problem: minimise the power mean of |F(x, Delta_h u)| over
/// the evaluation nodes among fields that agree with `u0` on the clamped layer.
struct LpProblem {
    DomainPtr domain;
    FModel model;
    Field u0;
    double p = 2.0;

    /// Threshold below which an energy counts as zero: 1e-12 (1 + max |Delta_h u0|).
    double zero_threshold() const;
};

/// Smallest exponent at which the discrete energy is convex: max(2, 1/c^3 + 1).
double convex_exponent(const FModel& model);

struct SolverConfig {
    /// Relative first-order tolerance (see LpSolution::grad_rel).
    double tol_grad = 1e-9;
    int max_iter = 200;
    /// Tikhonov shift, relative to the largest Hessian diagonal entry.
    double damping = 1e-12;
    std::function<void(int iteration, double objective, double grad_rel)> on_iteration;
};

struct LpSolution {
    Field u;
    Field f;
    double p = 0.0;
    double e_p = 0.0;
    double maxF = 0.0;
    /// max_j |d E_p / d u_j| over free nodes.
    double grad_norm = 0.0;
    /// grad_norm divided by the size of the individual terms that cancel in it.
    double grad_rel = 0.0;
    /// Estimated floating point floor of grad_norm at this iterate.
    double grad_floor = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct EnergyValue {
    double e_p = 0.0;
    double maxF = 0.0;
};

/// Overflow-safe power mean M (mean (|v_i| / M)^p)^(1/p) with M = max |v_i|.
double power_mean(std::span<const double> values, double p);

/// E_p(u) and max |F| over the evaluation nodes.
EnergyValue energy(const LpProblem& problem, const Field& u);

/// f = (|F| / e)^(p-1) sgn(F) F_xi at Delta_h u on evaluation nodes, 0 elsewhere
/// and identically 0 when e <= zero_threshold().
Field dual_field(const LpProblem& problem, const Field& u, double e_p);

struct Stationarity {
    double grad_norm = 0.0;
    double scale = 0.0;
    double floor = 0.0;
};

/// First-order residual of E_p at u, its natural scale and roundoff floor.
Stationarity stationarity(const LpProblem& problem, const Field& u);

/// Damped Newton with Armijo backtracking on the scaled objective
/// sum (|F| / M0)^p, M0 frozen per iteration. Succeeds when
/// grad_norm <= max(tol_grad * scale, floor). Throws SolverError otherwise.
LpSolution minimize(const LpProblem& problem, const Field& init, const SolverConfig& config = {});

}  // namespace linf
