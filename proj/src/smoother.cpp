#include "linf/smoother.hpp"

#include "linf/error.hpp"
#include "linf/log.hpp"

#include <algorithm>
#include <cmath>

namespace linf {

namespace {

double bump(double t) { return t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

struct Offset {
    int di;
    int dj;
    double w;
};

}  // namespace

Field mollify(const Field& g, double delta, const MollifyOptions& opt)
{
    const GridDomain& d = *g.domain;
    const double h = d.h();
    if (!(delta >= 2.0 * h * (1.0 - 1e-12))) throw ConfigError("mollify: delta must be at least 2h");

    const int R = static_cast<int>(std::floor(delta / h));
    const int Rj = d.dim() == 2 ? R : 0;
    std::vector<Offset> kernel;
    double mass = 0.0;
    for (int dj = -Rj; dj <= Rj; ++dj)
        for (int di = -R; di <= R; ++di) {
            const double w = bump(std::hypot(di * h, dj * h) / delta);
            if (w > 0.0) {
                kernel.push_back({di, dj, w});
                mass += w;
            }
        }
    for (auto& o : kernel) o.w /= mass;

    auto defined = [&](std::size_t k) { return opt.support ? static_cast<bool>((*opt.support)[k]) : d.in_domain(k); };
    Field out(g.domain);
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (!(opt.where ? static_cast<bool>((*opt.where)[k]) : d.in_domain(k))) continue;
        const int i = d.ix(k);
        const int j = d.iy(k);
        double s = 0.0;
        double m = 0.0;
        for (const auto& o : kernel) {
            const int ii = i + o.di;
            const int jj = j + o.dj;
            if (ii < 0 || ii >= d.nx() || jj < 0 || jj >= d.ny()) continue;
            const std::size_t q = d.index(ii, jj);
            if (!defined(q)) continue;
            s += o.w * g.values[q];
            m += o.w;
        }
        out.values[k] = opt.renormalize ? (m > 0.0 ? s / m : 0.0) : s;
    }
    return out;
}

double distance_cap(double t)
{
    if (t <= 0.5) return t;
    if (t >= 1.0) return 0.0;
    const double s = 2.0 * t - 1.0;
    return 0.5 * (s - 1.0) * (s - 1.0) * (3.0 * s + 1.0);
}

SmootherResult build_w(const Field& u0, double epsilon, const SmootherOptions& options)
{
    if (!(epsilon > 0.0)) throw ConfigError("build_w: epsilon must be positive");
    const DomainPtr& dom = u0.domain;
    const GridDomain& g = *dom;
    const double h = g.h();
    const double L = g.diameter();

    SmootherResult res;
    res.epsilon = epsilon;
    res.r0 = options.r0 > 0.0 ? options.r0 : 0.25 * g.inradius();

    // phi vanishes on the clamped layer and wherever d >= r0
    Field phi(dom);
    Mask where(g.size(), false);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.in_domain(k) || g.is_clamped(k)) continue;
        const double dc = res.r0 * distance_cap(g.distance_at(k) / res.r0);
        phi.values[k] = 0.5 * dc * (dc - h);
        where[k] = phi.values[k] != 0.0;
    }
    const Field lap = laplacian(u0);
    Mask stencil(g.size(), false);
    for (std::size_t k = 0; k < g.size(); ++k) stencil[k] = g.has_stencil(k);

    bool have_best = false;
    for (double r = res.r0; r >= 4.0 * h * (1.0 - 1e-12); r *= 0.5) {
        const double delta = std::max(L * std::pow(r / L, 0.25), 2.0 * h);
        const Field m = mollify(lap, delta, {!options.zero_extension, &stencil, &where});
        Field w = u0;
        for (std::size_t k = 0; k < g.size(); ++k) w.values[k] -= phi.values[k] * m.values[k];

        double sup = 0.0;
        for (const std::size_t k : g.eval_nodes())
            if (g.distance_at(k) < r) sup = std::max(sup, std::abs(laplacian_at(w, k)));
        res.history.push_back({r, delta, sup});
        log::info("build_w: r=%.5g delta=%.5g sup=%.4g", r, delta, sup);

        if (!have_best || sup < res.measured_sup || sup <= epsilon) {
            res.w = std::move(w);
            res.r = r;
            res.delta = delta;
            res.measured_sup = sup;
            have_best = true;
        }
        if (sup <= epsilon) {
            res.success = true;
            break;
        }
    }
    if (!have_best) throw ConfigError("build_w: r0 is below 4h; refine the grid");
    return res;
}

}  // namespace linf
