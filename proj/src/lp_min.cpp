#include "linf/lp_min.hpp"

#include "linf/error.hpp"
#include "linf/log.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace linf {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

/// Delta_h restricted to evaluation rows and free columns, plus the part of
/// Delta_h fixed by the clamped values.
struct Operator {
    std::vector<std::size_t> eval;
    std::vector<std::size_t> free;
    std::vector<Point> points;
    SpMat L;
    SpMat Lt;
    Vec fixed;

    Operator(const GridDomain& g, const Field& u0)
    {
        eval.assign(g.eval_nodes().begin(), g.eval_nodes().end());
        free.assign(g.free_nodes().begin(), g.free_nodes().end());
        std::vector<std::ptrdiff_t> col(g.size(), -1);
        for (std::size_t j = 0; j < free.size(); ++j) col[free[j]] = static_cast<std::ptrdiff_t>(j);

        const double ih2 = 1.0 / (g.h() * g.h());
        const int nbc = g.neighbour_count();
        std::vector<Eigen::Triplet<double>> trip;
        fixed = Vec::Zero(static_cast<Eigen::Index>(eval.size()));
        points.reserve(eval.size());
        for (std::size_t r = 0; r < eval.size(); ++r) {
            const std::size_t k = eval[r];
            points.push_back(g.point(k));
            const auto row = static_cast<Eigen::Index>(r);
            auto add = [&](std::size_t q, double w) {
                if (col[q] >= 0) trip.emplace_back(row, col[q], w);
                else fixed[row] += w * u0.values[q];
            };
            add(k, -nbc * ih2);
            const auto nb = g.neighbours(k);
            for (int q = 0; q < nbc; ++q) add(static_cast<std::size_t>(nb[q]), ih2);
        }
        L.resize(static_cast<Eigen::Index>(eval.size()), static_cast<Eigen::Index>(free.size()));
        L.setFromTriplets(trip.begin(), trip.end());
        L.makeCompressed();
        Lt = L.transpose();
    }

    Vec gather(const Field& u) const
    {
        Vec x(static_cast<Eigen::Index>(free.size()));
        for (std::size_t j = 0; j < free.size(); ++j) x[static_cast<Eigen::Index>(j)] = u.values[free[j]];
        return x;
    }

    void scatter(const Vec& x, Field& u) const
    {
        for (std::size_t j = 0; j < free.size(); ++j) u.values[free[j]] = x[static_cast<Eigen::Index>(j)];
    }

    Vec xi(const Vec& x) const { return L * x + fixed; }
};

struct Pointwise {
    Vec F;
    Vec F1;
    Vec F2;
};

Pointwise evaluate(const FModel& m, const Operator& op, const Vec& xi)
{
    Pointwise pw{Vec(xi.size()), Vec(xi.size()), Vec(xi.size())};
    for (Eigen::Index r = 0; r < xi.size(); ++r) {
        const Point x = op.points[static_cast<std::size_t>(r)];
        pw.F[r] = m.eval(x, xi[r]);
        pw.F1[r] = m.d1(x, xi[r]);
        pw.F2[r] = m.d2(x, xi[r]);
    }
    return pw;
}

double power_mean_vec(const Vec& F, double p)
{
    return power_mean(std::span<const double>(F.data(), static_cast<std::size_t>(F.size())), p);
}

/// f at evaluation rows; zero when e is below the threshold.
Vec dual_rows(const Pointwise& pw, double e, double p, double zero)
{
    Vec f = Vec::Zero(pw.F.size());
    if (!(e > zero)) return f;
    for (Eigen::Index r = 0; r < f.size(); ++r) {
        const double ratio = std::abs(pw.F[r]) / e;
        f[r] = std::pow(ratio, p - 1.0) * sgn(pw.F[r]) * pw.F1[r];
    }
    return f;
}

Stationarity measure(const Operator& op, const Pointwise& pw, const Vec& xi_abs_sum, double e, double p, double zero)
{
    Stationarity s;
    if (!(e > zero)) return s;
    const Vec f = dual_rows(pw, e, p, zero);
    const double nE = static_cast<double>(op.eval.size());
    const Vec g = op.Lt * f;
    s.grad_norm = g.cwiseAbs().maxCoeff() / nE;

    // size of the terms that cancel in L^T f, and their rounding error
    Vec df(f.size());
    for (Eigen::Index r = 0; r < f.size(); ++r) {
        const double ratio = std::abs(pw.F[r]) / e;
        const double dxi = 4.0 * kEps * xi_abs_sum[r];
        const double dfdxi = (p - 1.0) * std::pow(ratio, p - 2.0) * pw.F1[r] * pw.F1[r] / e +
                             std::pow(ratio, p - 1.0) * std::abs(pw.F2[r]);
        df[r] = dfdxi * dxi + (p + 2.0) * kEps * std::abs(f[r]);
    }
    SpMat absLt = op.Lt.cwiseAbs();
    s.scale = (absLt * f.cwiseAbs()).maxCoeff() / nE;
    s.floor = 4.0 * (absLt * df).maxCoeff() / nE;
    return s;
}

/// sum |stencil weight * u| per evaluation row: the magnitude that rounding acts on.
Vec stencil_magnitude(const Operator& op, const GridDomain& g, const Field& u)
{
    Vec out(static_cast<Eigen::Index>(op.eval.size()));
    const double ih2 = 1.0 / (g.h() * g.h());
    for (std::size_t r = 0; r < op.eval.size(); ++r) {
        const std::size_t k = op.eval[r];
        double s = g.neighbour_count() * std::abs(u.values[k]);
        const auto nb = g.neighbours(k);
        for (int q = 0; q < g.neighbour_count(); ++q) s += std::abs(u.values[static_cast<std::size_t>(nb[q])]);
        out[static_cast<Eigen::Index>(r)] = s * ih2;
    }
    return out;
}

Field to_field(const Operator& op, DomainPtr d, const Vec& rows)
{
    Field f(std::move(d));
    for (std::size_t r = 0; r < op.eval.size(); ++r) f.values[op.eval[r]] = rows[static_cast<Eigen::Index>(r)];
    return f;
}

void check_problem(const LpProblem& problem)
{
    if (!problem.domain) throw ConfigError("LpProblem: missing domain");
    if (!problem.u0.domain || problem.u0.size() != problem.domain->size())
        throw ConfigError("LpProblem: u0 does not live on the problem grid");
    if (!(problem.p >= 1.0)) throw ConfigError("LpProblem: p must be >= 1");
}

}  // namespace

double convex_exponent(const FModel& model) { return std::max(2.0, model.convexity_exponent()); }

double LpProblem::zero_threshold() const
{
    double m = 0.0;
    for (const std::size_t k : domain->eval_nodes()) m = std::max(m, std::abs(laplacian_at(u0, k)));
    return 1e-12 * (1.0 + m);
}

double power_mean(std::span<const double> values, double p)
{
    if (values.empty()) return 0.0;
    double M = 0.0;
    for (const double v : values) M = std::max(M, std::abs(v));
    if (M == 0.0) return 0.0;
    double s = 0.0;
    for (const double v : values) s += std::pow(std::abs(v) / M, p);
    return M * std::pow(s / static_cast<double>(values.size()), 1.0 / p);
}

EnergyValue energy(const LpProblem& problem, const Field& u)
{
    check_problem(problem);
    const GridDomain& g = *problem.domain;
    std::vector<double> F;
    F.reserve(g.eval_nodes().size());
    EnergyValue ev;
    for (const std::size_t k : g.eval_nodes()) {
        F.push_back(problem.model.eval(g.point(k), laplacian_at(u, k)));
        ev.maxF = std::max(ev.maxF, std::abs(F.back()));
    }
    ev.e_p = power_mean(F, problem.p);
    return ev;
}

Field dual_field(const LpProblem& problem, const Field& u, double e_p)
{
    check_problem(problem);
    const GridDomain& g = *problem.domain;
    Field f(problem.domain);
    if (!(e_p > problem.zero_threshold())) return f;
    for (const std::size_t k : g.eval_nodes()) {
        const Point x = g.point(k);
        const double xi = laplacian_at(u, k);
        const double F = problem.model.eval(x, xi);
        f.values[k] = std::pow(std::abs(F) / e_p, problem.p - 1.0) * sgn(F) * problem.model.d1(x, xi);
    }
    return f;
}

Stationarity stationarity(const LpProblem& problem, const Field& u)
{
    check_problem(problem);
    const Operator op(*problem.domain, problem.u0);
    const Vec xi = op.xi(op.gather(u));
    const Pointwise pw = evaluate(problem.model, op, xi);
    const double e = power_mean_vec(pw.F, problem.p);
    return measure(op, pw, stencil_magnitude(op, *problem.domain, u), e, problem.p, problem.zero_threshold());
}

LpSolution minimize(const LpProblem& problem, const Field& init, const SolverConfig& config)
{
    check_problem(problem);
    const double p = problem.p;
    if (p < convex_exponent(problem.model) * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "minimize: p = " << p << " is below the convexity exponent " << convex_exponent(problem.model);
        throw ConfigError(msg.str());
    }
    const GridDomain& g = *problem.domain;
    const Operator op(g, problem.u0);
    const double zero = problem.zero_threshold();

    LpSolution sol;
    sol.p = p;
    sol.u = problem.u0;
    Vec x = op.gather(init);
    op.scatter(x, sol.u);

    Eigen::SimplicialLDLT<SpMat> ldlt;
    Eigen::Index pattern_nnz = -1;
    double tau = config.damping;

    for (int it = 0;; ++it) {
        const Vec xi = op.xi(x);
        const Pointwise pw = evaluate(problem.model, op, xi);
        for (Eigen::Index r = 0; r < pw.F.size(); ++r)
            if (!std::isfinite(pw.F[r]) || !std::isfinite(pw.F1[r]) || !std::isfinite(pw.F2[r]))
                throw SolverError("minimize: non-finite model value; the model violates its bounds");
        const double M0 = pw.F.cwiseAbs().maxCoeff();
        const double e = power_mean_vec(pw.F, p);
        sol.iterations = it;
        sol.maxF = M0;
        sol.e_p = e;
        if (!(e > zero)) {
            sol.grad_norm = sol.grad_rel = sol.grad_floor = 0.0;
            sol.converged = true;
            break;
        }
        const Stationarity st = measure(op, pw, stencil_magnitude(op, g, sol.u), e, p, zero);
        sol.grad_norm = st.grad_norm;
        sol.grad_rel = st.scale > 0.0 ? st.grad_norm / st.scale : 0.0;
        sol.grad_floor = st.floor;
        if (config.on_iteration) config.on_iteration(it, e, sol.grad_rel);
        log::debug("  p=%g it=%d e=%.15g grad_rel=%.3e floor_rel=%.3e", p, it, e, sol.grad_rel,
                   st.scale > 0.0 ? st.floor / st.scale : 0.0);
        if (st.grad_norm <= std::max(config.tol_grad * st.scale, st.floor)) {
            sol.converged = true;
            break;
        }
        if (it >= config.max_iter) {
            std::ostringstream msg;
            msg << "minimize: iteration cap " << config.max_iter << " reached at p = " << p
                << " (relative gradient " << sol.grad_rel << ")";
            throw SolverError(msg.str());
        }

        // scaled objective psi = sum (|F| / M0)^p and its derivatives in xi
        Vec a(pw.F.size());
        Vec b(pw.F.size());
        double psi = 0.0;
        for (Eigen::Index r = 0; r < a.size(); ++r) {
            const double ratio = std::abs(pw.F[r]) / M0;
            const double rp2 = std::pow(ratio, p - 2.0);
            psi += rp2 * ratio * ratio;
            a[r] = p * rp2 * ratio * sgn(pw.F[r]) * pw.F1[r] / M0;
            b[r] = std::max(0.0, p * rp2 * ((p - 1.0) * pw.F1[r] * pw.F1[r] + pw.F[r] * pw.F2[r]) / (M0 * M0));
        }
        const Vec grad = op.Lt * a;
        auto psi_at = [&](const Vec& trial_xi) {
            double s = 0.0;
            for (Eigen::Index r = 0; r < trial_xi.size(); ++r) {
                const double F = problem.model.eval(op.points[static_cast<std::size_t>(r)], trial_xi[r]);
                s += std::pow(std::abs(F) / M0, p);
            }
            return s;
        };
        auto line_search = [&](const Vec& dir, Vec& x_out) {
            const double slope = grad.dot(dir);
            if (!(slope < 0.0)) return false;
            const Vec ldir = op.L * dir;
            double t = 1.0;
            for (int k = 0; k < 60; ++k, t *= 0.5) {
                const double trial = psi_at(xi + t * ldir);
                if (std::isfinite(trial) && trial <= psi + 1e-4 * t * slope) {
                    x_out = x + t * dir;
                    return true;
                }
            }
            return false;
        };

        SpMat H = op.Lt * b.asDiagonal() * op.L;
        const double dmax = H.diagonal().maxCoeff();
        Vec step;
        bool solved = false;
        for (int attempt = 0; attempt < 8 && !solved; ++attempt) {
            SpMat Hs = H;
            for (Eigen::Index j = 0; j < Hs.rows(); ++j) Hs.coeffRef(j, j) += tau * dmax;
            Hs.makeCompressed();
            if (Hs.nonZeros() != pattern_nnz) {
                ldlt.analyzePattern(Hs);
                pattern_nnz = Hs.nonZeros();
            }
            ldlt.factorize(Hs);
            if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
                step = -ldlt.solve(grad);
                solved = step.allFinite();
            }
            if (!solved) tau = std::max(tau * 100.0, 1e-14);
        }

        Vec x_next;
        bool moved = solved && line_search(step, x_next);
        if (!moved) {
            log::debug("  p=%g it=%d Newton step rejected; trying a scaled gradient step", p, it);
            Vec diag = H.diagonal();
            for (Eigen::Index j = 0; j < diag.size(); ++j) diag[j] = diag[j] > 0.0 ? diag[j] : dmax;
            const Vec dir = -grad.cwiseQuotient(diag);
            moved = line_search(dir, x_next);
        }
        if (!moved) {
            std::ostringstream msg;
            msg << "minimize: line search failed at p = " << p << " after " << it
                << " iterations (relative gradient " << sol.grad_rel << ", floor "
                << (st.scale > 0.0 ? st.floor / st.scale : 0.0) << ")";
            throw SolverError(msg.str());
        }
        x = x_next;
        op.scatter(x, sol.u);
    }
    sol.f = to_field(op, problem.domain, dual_rows(evaluate(problem.model, op, op.xi(x)), sol.e_p, p, zero));
    return sol;
}

}  // namespace linf
