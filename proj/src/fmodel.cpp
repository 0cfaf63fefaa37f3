#include "linf/fmodel.hpp"

#include "linf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace linf {

FModel make_linear()
{
    FModel m;
    m.id = "linear";
    m.c = 1.0;
    m.value = [](Point, double xi) { return xi; };
    m.dvalue = [](Point, double) { return 1.0; };
    m.d2value = [](Point, double) { return 0.0; };
    return m;
}

FModel make_weighted(std::function<double(Point)> a, double c, std::string a_source)
{
    if (!(c > 0.0 && c <= 1.0)) throw ModelError("weighted model: c must lie in (0, 1]");
    FModel m;
    m.id = a_source.empty() ? "weighted" : "weighted(" + a_source + ")";
    m.c = c;
    m.value = [a](Point x, double xi) { return a(x) * xi; };
    m.dvalue = [a](Point x, double) { return a(x); };
    m.d2value = [](Point, double) { return 0.0; };
    return m;
}

FModel make_arctan_tilt(double eps)
{
    if (!(eps >= 0.0 && eps <= 0.5)) throw ModelError("arctan_tilt: epsilon must lie in [0, 1/2]");
    FModel m;
    m.id = "arctan_tilt";
    m.c = 1.0 / (1.0 + eps);
    m.params["epsilon"] = eps;
    m.value = [eps](Point, double xi) { return xi + eps * std::atan(xi); };
    m.dvalue = [eps](Point, double xi) { return 1.0 + eps / (1.0 + xi * xi); };
    m.d2value = [eps](Point, double xi) {
        const double q = 1.0 + xi * xi;
        return -2.0 * eps * xi / (q * q);
    };
    return m;
}

double invert(const FModel& model, Point x, double y)
{
    if (y == 0.0) return 0.0;
    const double s = y > 0.0 ? 1.0 : -1.0;
    const double target = std::abs(y);
    const double scale = std::max(1.0, target);
    // g(t) = s F(x, s t) - |y| is increasing in t >= 0
    auto g = [&](double t) { return s * model.eval(x, s * t) - target; };

    double lo = model.c * target;
    double hi = target / model.c;
    const double tol_bracket = 1e-12 * scale;
    if (g(lo) > tol_bracket || g(hi) < -tol_bracket)
        throw ModelError("invert: root not bracketed by [c|y|, |y|/c] for model " + model.id);

    if (g(lo) >= 0.0) return s * lo;
    if (g(hi) <= 0.0) return s * hi;
    while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) lo = mid;
        else hi = mid;
    }

    double t = 0.5 * (lo + hi);
    double r = g(t);
    for (int it = 0; it < 100 && std::abs(r) > 4.0 * std::numeric_limits<double>::epsilon() * scale; ++it) {
        double next = t - r / model.d1(x, s * t);
        if (!(next >= lo && next <= hi) || next == t) next = 0.5 * (lo + hi);
        // bracket collapsed to adjacent doubles
        if (next == t) break;
        const double rn = g(next);
        if (rn < 0.0) lo = next;
        else hi = next;
        t = next;
        r = rn;
    }
    if (!(std::abs(r) <= 1e-10 * scale))
        throw ModelError("invert: Newton polish did not converge for model " + model.id + " at y = " + std::to_string(y));
    return s * t;
}

Sampler Sampler::box(Point lo, Point hi, int dim, int nx, double xi_max, int n_xi, double xi_min)
{
    Sampler s;
    auto axis = [nx](double a, double b, int i) {
        return nx == 1 ? 0.5 * (a + b) : a + (b - a) * i / (nx - 1);
    };
    for (int j = 0; j < (dim == 2 ? nx : 1); ++j)
        for (int i = 0; i < nx; ++i)
            s.xs.push_back(Point{axis(lo.x, hi.x, i), dim == 2 ? axis(lo.y, hi.y, j) : 0.0});

    const int k = std::max(1, (n_xi - 1) / 2);
    s.xis.push_back(0.0);
    for (int i = 0; i < k; ++i) {
        const double t = k == 1 ? 1.0 : static_cast<double>(i) / (k - 1);
        const double v = xi_min * std::pow(xi_max / xi_min, t);
        s.xis.push_back(v);
        s.xis.push_back(-v);
    }
    std::sort(s.xis.begin(), s.xis.end());
    return s;
}

namespace {

constexpr double kSlack = 1e-12;

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

ModelReport check_assumptions(const FModel& model, const Sampler& sampler)
{
    ModelReport rep;
    const double c = model.c;
    for (const Point& x : sampler.xs) {
        for (const double xi : sampler.xis) {
            ++rep.samples;
            const double F = model.eval(x, xi);
            const double F1 = model.d1(x, xi);
            const double F2 = model.d2(x, xi);
            if (xi == 0.0 && std::abs(F) > 1e-14) rep.add({"F(x,0)=0", x, xi, F});
            if (F1 < c * (1.0 - kSlack)) rep.add({"F_xi>=c", x, xi, F1});
            if (F1 > (1.0 + kSlack) / c) rep.add({"F_xi<=1/c", x, xi, F1});
            if (F * F2 < -(1.0 + kSlack) / c) rep.add({"F*F_xixi>=-1/c", x, xi, F * F2});

            const double step = 1e-5 * std::max(1.0, std::abs(xi));
            const double fd1 = (model.eval(x, xi + step) - model.eval(x, xi - step)) / (2.0 * step);
            if (std::abs(fd1 - F1) > 1e-6 * std::max(1.0, std::abs(F1)))
                rep.add({"dvalue~fd(value)", x, xi, fd1 - F1});
            const double fd2 = (model.d1(x, xi + step) - model.d1(x, xi - step)) / (2.0 * step);
            if (std::abs(fd2 - F2) > 1e-6 * std::max(1.0, std::abs(F2)))
                rep.add({"d2value~fd(dvalue)", x, xi, fd2 - F2});
        }
    }
    return rep;
}

ModelReport check_consequences(const FModel& model, double p, const Sampler& sampler)
{
    ModelReport rep;
    const double c = model.c;
    const bool convex_regime = p >= model.convexity_exponent() * (1.0 - kSlack);
    for (const Point& x : sampler.xs) {
        for (const double xi : sampler.xis) {
            ++rep.samples;
            const double F = model.eval(x, xi);
            const double aF = std::abs(F);
            const double axi = std::abs(xi);
            if (sgn(F) != sgn(xi)) rep.add({"sgn(F)=sgn(xi)", x, xi, F});
            if (aF < c * axi * (1.0 - kSlack)) rep.add({"|F|>=c|xi|", x, xi, aF});
            if (aF > axi / c * (1.0 + kSlack)) rep.add({"|F|<=|xi|/c", x, xi, aF});
            if (model.d1(x, xi) * axi < c * c * aF * (1.0 - kSlack))
                rep.add({"F_xi|xi|>=c^2|F|", x, xi, model.d1(x, xi) * axi});

            if (!convex_regime) continue;
            const double step = 1e-2 * std::max(axi, 1e-2);
            const double a = std::abs(model.eval(x, xi - step));
            const double b = aF;
            const double d = std::abs(model.eval(x, xi + step));
            const double top = std::max({a, b, d});
            if (top == 0.0) continue;
            // powers of ratios in [0, 1] so that large p cannot overflow
            const double pa = std::pow(a / top, p);
            const double pb = std::pow(b / top, p);
            const double pd = std::pow(d / top, p);
            const double second = pa - 2.0 * pb + pd;
            if (second < -1e-10 * (pa + 2.0 * pb + pd))
                rep.add({"(|F|^p)''>=0", x, xi, second});
        }
    }
    return rep;
}

}  // namespace linf
