#include "linf/oracle1d.hpp"

#include "linf/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace linf {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

bool is_linear(const FModel& m) { return m.id == "linear"; }

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

/// G(x, y) = F(x, .)^{-1}(y)
double inverse(const FModel& model, double x, double y)
{
    if (is_linear(model)) return y;
    return invert(model, Point{x, 0.0}, y);
}

/// Adaptive over the whole interval; `depth` 0 applies a single 31-point rule,
/// which is what the per-cell reconstruction uses on smooth pieces.
template <typename Fn>
double integrate(Fn&& fn, double lo, double hi, unsigned depth = 12)
{
    if (!(hi > lo)) return 0.0;
    double err = 0.0;
    const double v = GK::integrate(fn, lo, hi, depth, 1e-13, &err);
    if (!std::isfinite(v)) throw SolverError("oracle: quadrature produced a non-finite value");
    return v;
}

/// int over [lo, hi] of w(x) G(x, k s(x)), split at m.
template <typename W>
double moment(const Oracle1DProblem& pr, double k, double m, double lo, double hi, W&& w)
{
    auto piece = [&](double s, double x0, double x1) {
        if (k == 0.0) return 0.0;
        return integrate([&](double x) { return w(x) * inverse(pr.model, x, k * s); }, x0, x1);
    };
    const double cut = std::clamp(m, lo, hi);
    return piece(-1.0, lo, cut) + piece(1.0, cut, hi);
}

std::array<double, 2> raw(const Oracle1DProblem& pr, double k, double m)
{
    const double r1 = moment(pr, k, m, pr.a, pr.b, [](double) { return 1.0; }) - pr.d1();
    const double r2 = moment(pr, k, m, pr.a, pr.b, [&](double x) { return pr.b - x; }) - pr.d2();
    return {r1, r2};
}

std::array<double, 2> scale(const Oracle1DProblem& pr, double e, std::array<double, 2> r)
{
    const double L = pr.length();
    return {r[0] / std::max({1.0, std::abs(pr.d1()), e * L}), r[1] / std::max({1.0, std::abs(pr.d2()), e * L * L})};
}

void check(const Oracle1DProblem& pr)
{
    if (!(pr.b > pr.a)) throw ConfigError("oracle: need b > a");
}

Oracle1DSolution finish(const Oracle1DProblem& pr, double k, double m)
{
    Oracle1DSolution s;
    s.problem = pr;
    s.e = std::abs(k);
    s.sigma = k < 0.0 ? -1 : 1;
    const double tol = 1e-12 * pr.length();
    s.crossing = s.e > 0.0 && m > pr.a + tol && m < pr.b - tol;
    s.m = s.crossing ? m : pr.a;
    if (!s.crossing && m >= pr.b - tol && s.e > 0.0) s.sigma = -s.sigma;
    s.residual = scaled_residual(pr, s.e, s.m, s.sigma);
    return s;
}

}  // namespace

double Oracle1DSolution::second_derivative(double x) const
{
    if (e == 0.0) return 0.0;
    const double s = crossing ? sgn(x - m) : 1.0;
    return inverse(problem.model, x, e * sigma * s);
}

std::array<double, 2> moment_residual(const Oracle1DProblem& problem, double e, double m, int sigma)
{
    check(problem);
    if (e < 0.0) throw ConfigError("moment_residual: e must be >= 0");
    return raw(problem, e * (sigma < 0 ? -1.0 : 1.0), m);
}

std::array<double, 2> scaled_residual(const Oracle1DProblem& problem, double e, double m, int sigma)
{
    return scale(problem, e, moment_residual(problem, e, m, sigma));
}

Oracle1DSolution solve_bilaplacian_closed_form(const Oracle1DProblem& pr)
{
    check(pr);
    if (!is_linear(pr.model)) throw ConfigError("closed form oracle requires the linear model");
    const double L = pr.length();
    const double D1 = pr.d1();
    const double rho = pr.d2() / L;
    const double zero = 1e-14 * std::max({1.0, std::abs(D1), std::abs(rho)});
    if (std::abs(D1) <= zero && std::abs(rho) <= zero) return finish(pr, 0.0, pr.a);

    // with t = (b - m)/L and k = e sigma L:  k (2t - 1) = D1,  k (t^2 - 1/2) = rho
    if (std::abs(D1) <= zero) return finish(pr, -4.0 * rho / L, pr.b - 0.5 * L);
    const double q = rho / D1;
    if (std::abs(q - 0.5) <= 1e-14) return finish(pr, D1 / L, pr.a);
    const double disc = std::sqrt((q - 0.5) * (q - 0.5) + 0.25);
    double t = q + disc;
    if (t < 0.0 || t > 1.0) t = q - disc;
    t = std::clamp(t, 0.0, 1.0);
    const double k = D1 / (2.0 * t - 1.0);
    return finish(pr, k / L, pr.b - t * L);
}

Oracle1DSolution solve_general(const Oracle1DProblem& pr)
{
    check(pr);
    const double L = pr.length();
    const double D1 = pr.d1();
    const double D2 = pr.d2();
    const double zero = 1e-14 * std::max({1.0, std::abs(D1), std::abs(D2) / L});
    if (std::abs(D1) <= zero && std::abs(D2) <= zero * L) return finish(pr, 0.0, pr.a);

    // inner: k(m) from the monotone combination (b - m) R1 - R2 = 0
    auto k_of_m = [&](double m) {
        const double target = (pr.b - m) * D1 - D2;
        auto h = [&](double k) { return moment(pr, k, m, pr.a, pr.b, [&](double x) { return x - m; }) - target; };
        const double guess = std::max(1.0, 4.0 * (std::abs(D1) / L + std::abs(D2) / (L * L))) / pr.model.c;
        double lo = -guess;
        double hi = guess;
        for (int i = 0; i < 200 && h(lo) > 0.0; ++i) lo *= 2.0;
        for (int i = 0; i < 200 && h(hi) < 0.0; ++i) hi *= 2.0;
        const double hlo = h(lo);
        const double hhi = h(hi);
        if (hlo > 0.0 || hhi < 0.0) throw SolverError("oracle: inner bracket exhausted");
        std::uintmax_t iters = 300;
        const auto r = boost::math::tools::toms748_solve(h, lo, hi, hlo, hhi,
                                                         boost::math::tools::eps_tolerance<double>(52), iters);
        return 0.5 * (r.first + r.second);
    };
    auto r1 = [&](double m) {
        const double k = k_of_m(m);
        return moment(pr, k, m, pr.a, pr.b, [](double) { return 1.0; }) - D1;
    };

    const double fa = r1(pr.a);
    const double fb = r1(pr.b);
    double m = pr.a;
    const double tol1 = 1e-13 * std::max(1.0, std::abs(D1));
    if (std::abs(fa) <= tol1) m = pr.a;
    else if (std::abs(fb) <= tol1) m = pr.b;
    else if ((fa < 0.0) == (fb < 0.0)) throw SolverError("oracle: first moment does not change sign over [a, b]");
    else {
        std::uintmax_t iters = 300;
        const auto r = boost::math::tools::toms748_solve(r1, pr.a, pr.b, fa, fb,
                                                         boost::math::tools::eps_tolerance<double>(52), iters);
        m = 0.5 * (r.first + r.second);
    }
    Oracle1DSolution sol = finish(pr, k_of_m(m), m);
    if (!(std::abs(sol.residual[0]) <= 1e-10 && std::abs(sol.residual[1]) <= 1e-10)) {
        std::ostringstream msg;
        msg << "oracle: residual (" << sol.residual[0] << ", " << sol.residual[1] << ") exceeds 1e-10";
        throw SolverError(msg.str());
    }
    if (is_linear(pr.model)) {
        const Oracle1DSolution cf = solve_bilaplacian_closed_form(pr);
        if (std::abs(cf.e - sol.e) > 1e-10 * std::max(1.0, cf.e) ||
            (cf.crossing && std::abs(cf.m - sol.m) > 1e-10 * L))
            throw SolverError("oracle: general solve disagrees with the closed form");
    }
    return sol;
}

Reconstruction reconstruct_u(const Oracle1DSolution& s, DomainPtr grid)
{
    if (grid->dim() != 1) throw ConfigError("reconstruct_u: grid must be one-dimensional");
    const Oracle1DProblem& pr = s.problem;
    const double a = pr.a;
    const double k = s.e * s.sigma;
    const bool exact = is_linear(pr.model);

    // (u, u') at x by integrating from (x0, u0, du0)
    auto advance = [&](double x0, double u0, double du0, double x1) -> std::pair<double, double> {
        if (exact) {
            // piecewise constant u'' = k s(x); split the step at m
            double x = x0;
            double u = u0;
            double du = du0;
            const double cut = s.crossing ? std::clamp(s.m, x0, x1) : x0;
            for (const auto& [lo, hi, c] : {std::tuple{x0, cut, -k}, std::tuple{cut, x1, k}}) {
                if (!(hi > lo)) continue;
                const double len = hi - lo;
                u += du * len + 0.5 * c * len * len;
                du += c * len;
                x = hi;
            }
            (void)x;
            return {u, du};
        }
        const double cut = s.crossing ? std::clamp(s.m, x0, x1) : x0;
        auto upp = [&](double y, double sign) { return s.e == 0.0 ? 0.0 : inverse(pr.model, y, k * sign); };
        double I0 = 0.0;
        double I1 = 0.0;
        for (const auto& [lo, hi, sign] : {std::tuple{x0, cut, -1.0}, std::tuple{cut, x1, 1.0}}) {
            I0 += integrate([&](double y) { return upp(y, sign); }, lo, hi, 0);
            I1 += integrate([&](double y) { return (x1 - y) * upp(y, sign); }, lo, hi, 0);
        }
        return {u0 + du0 * (x1 - x0) + I1, du0 + I0};
    };

    Reconstruction rec{Field(grid)};
    double x = a;
    double u = pr.ua;
    double du = pr.dua;
    const double tol = 1e-9 * pr.length();
    for (std::size_t n = 0; n < grid->size(); ++n) {
        const double xn = grid->point(n).x;
        if (xn < a - tol || xn > pr.b + tol) continue;
        const double target = std::clamp(xn, a, pr.b);
        std::tie(u, du) = advance(x, u, du, target);
        x = target;
        rec.u.values[n] = u;
    }
    std::tie(u, du) = advance(x, u, du, pr.b);
    rec.mismatch_u = std::abs(u - pr.ub);
    rec.mismatch_du = std::abs(du - pr.dub);
    return rec;
}

}  // namespace linf
