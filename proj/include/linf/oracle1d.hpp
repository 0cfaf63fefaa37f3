#pragma once

#include "linf/fmodel.hpp"
#include "linf/grid.hpp"

#include <array>

namespace linf {

/// Clamped data on (a, b): values and first derivatives at both ends.
struct Oracle1DProblem {
    double a = 0.0;
    double b = 1.0;
    FModel model = make_linear();
    double ua = 0.0;
    double dua = 0.0;
    double ub = 0.0;
    double dub = 0.0;

    double length() const { return b - a; }
    /// u'(b) - u'(a)
    double d1() const { return dub - dua; }
    /// u(b) - u(a) - u'(a)(b - a)
    double d2() const { return ub - ua - dua * (b - a); }
};

/// u'' = G(x, e sigma sgn(x - m)) with G the inverse of F in xi. `m == a`
/// together with `crossing == false` encodes a second derivative of constant
/// sign sigma.
struct Oracle1DSolution {
    Oracle1DProblem problem;
    double e = 0.0;
    double m = 0.0;
    int sigma = 1;
    bool crossing = false;
    /// Moment residuals scaled by max(1, |D1|, e L) and max(1, |D2|, e L^2).
    std::array<double, 2> residual{0.0, 0.0};

    double second_derivative(double x) const;
};

/// Raw residuals of the two integrated clamped constraints,
/// (int u'' - D1, int (b - x) u'' - D2), by adaptive Gauss-Kronrod quadrature.
std::array<double, 2> moment_residual(const Oracle1DProblem& problem, double e, double m, int sigma);

/// Scaled residuals as stored in Oracle1DSolution::residual.
std::array<double, 2> scaled_residual(const Oracle1DProblem& problem, double e, double m, int sigma);

/// Exact solve for F(x, xi) = xi: t = (b - m)/L solves a quadratic.
Oracle1DSolution solve_bilaplacian_closed_form(const Oracle1DProblem& problem);

/// Nested root finding for any admissible model. With signed k = e sigma,
/// the inner solve of int (x - m) G(x, k sgn(x - m)) = (b - m) D1 - D2 is
/// monotone in k, and the outer solve of the first moment changes sign
/// between m = a and m = b. Throws SolverError if the scaled residual
/// exceeds 1e-10.
Oracle1DSolution solve_general(const Oracle1DProblem& problem);

struct Reconstruction {
    Field u;
    /// Mismatch of u(b) and u'(b) against the data.
    double mismatch_u = 0.0;
    double mismatch_du = 0.0;
};

/// Integrates u'' twice from a (exact piecewise quadratic for the linear
/// model, per-cell quadrature otherwise) onto the nodes of `grid` that lie in [a, b].
Reconstruction reconstruct_u(const Oracle1DSolution& solution, DomainPtr grid);

}  // namespace linf
