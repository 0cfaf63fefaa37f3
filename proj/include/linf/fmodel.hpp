#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace linf {

/// A point of the physical domain. In 1D only `x` is used.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// The nonlinearity F(x, xi) applied to the Laplacian, together with its
/// first two xi-derivatives and the ellipticity constant c for which
///
///     F(x, 0) = 0,   c <= F_xi <= 1/c,   F * F_xixi >= -1/c.
///
/// Models are value types built from closures; they are cheap to copy and
/// safe to evaluate concurrently.
struct FModel {
    using Fn = std::function<double(Point, double)>;

    std::string id;
    double c = 1.0;
    Fn value;
    Fn dvalue;
    Fn d2value;
    std::map<std::string, double> params;

    double eval(Point x, double xi) const { return value(x, xi); }
    double d1(Point x, double xi) const { return dvalue(x, xi); }
    double d2(Point x, double xi) const { return d2value(x, xi); }

    /// Smallest exponent for which xi -> |F(x, xi)|^p is convex.
    double convexity_exponent() const { return 1.0 / (c * c * c) + 1.0; }
};

/// F(x, xi) = xi with c = 1 (the infinity-Bilaplacian).
FModel make_linear();

/// F(x, xi) = a(x) xi. The caller declares c and must ensure c <= a <= 1/c.
FModel make_weighted(std::function<double(Point)> a, double c, std::string a_source = {});

/// F(x, xi) = xi + eps * atan(xi) with eps in [0, 1/2] and c = 1 / (1 + eps).
FModel make_arctan_tilt(double eps);

/// Solves F(x, xi) = y for xi.
///
/// Bracketed bisection on [c|y|, |y|/c] (with the sign of y) down to width
/// 1e-6 relative, then safeguarded Newton until |F(x, xi) - y| <= 1e-10 max(1, |y|).
/// Throws ModelError if the bracket does not contain the root or the polish
/// does not converge, both of which mean the model violates its bounds.
double invert(const FModel& model, Point x, double y);

/// Sample points for the pointwise property checks.
struct Sampler {
    std::vector<Point> xs;
    std::vector<double> xis;

    /// `nx` points per axis on [lo, hi] (dim 1 or 2) and xi in +-[xi_min, xi_max]
    /// log-spaced with `n_xi` values in total, including 0.
    static Sampler box(Point lo, Point hi, int dim, int nx, double xi_max = 1e3,
                       int n_xi = 1001, double xi_min = 1e-3);

    std::size_t size() const { return xs.size() * xis.size(); }
};

struct Violation {
    std::string inequality;
    Point x;
    double xi = 0.0;
    double measured = 0.0;
};

struct ModelReport {
    bool passed = true;
    std::vector<Violation> violations;
    std::size_t samples = 0;

    void add(Violation v)
    {
        violations.push_back(std::move(v));
        passed = false;
    }
};

/// Checks F(x,0)=0, c <= F_xi <= 1/c, F F_xixi >= -1/c and the consistency of
/// the supplied derivatives with centered finite differences.
ModelReport check_assumptions(const FModel& model, const Sampler& sampler);

/// Checks the consequences of the model bounds at the sample points:
/// sign preservation, c|xi| <= |F| <= |xi|/c, F_xi |xi| >= c^2 |F|, and (when
/// p >= 1/c^3 + 1) nonnegative second differences of xi -> |F|^p.
ModelReport check_consequences(const FModel& model, double p, const Sampler& sampler);

}  // namespace linf
