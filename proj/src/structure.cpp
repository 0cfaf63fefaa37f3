#include "linf/structure.hpp"

#include "linf/error.hpp"
#include "linf/log.hpp"
#include "linf/smoother.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace linf {

namespace {

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double harmonic_residual(const Field& f, const Mask& region)
{
    const GridDomain& g = *f.domain;
    double r = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (region[k] && g.has_stencil(k)) r = std::max(r, std::abs(laplacian_at(f, k)));
    return r * g.h() * g.h();
}

HarmonicFit fit_harmonic(const Field& f, const std::vector<Field>& basis, const Mask& region)
{
    const GridDomain& g = *f.domain;
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (region[k]) nodes.push_back(k);
    const auto n = static_cast<Eigen::Index>(nodes.size());
    const auto m = static_cast<Eigen::Index>(basis.size());
    if (m == 0 || n < m) throw DegenerateError("fit_harmonic: fewer region nodes than basis functions");

    Eigen::MatrixXd A(n, m);
    Eigen::VectorXd b(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::size_t k = nodes[static_cast<std::size_t>(r)];
        b[r] = f.values[k];
        for (Eigen::Index c = 0; c < m; ++c) A(r, c) = basis[static_cast<std::size_t>(c)].values[k];
    }
    // column scaling keeps the rank test meaningful for basis members of different size
    Eigen::VectorXd s = A.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < m; ++c) {
        if (s[c] == 0.0) throw DegenerateError("fit_harmonic: basis function vanishes on the region");
        A.col(c) /= s[c];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < m) throw DegenerateError("fit_harmonic: basis is rank deficient on the region");
    const Eigen::VectorXd x = qr.solve(b).cwiseQuotient(s);

    HarmonicFit out;
    out.coefficients.assign(x.data(), x.data() + m);
    out.fit = Field(f.domain);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.in_domain(k)) continue;
        double v = 0.0;
        for (Eigen::Index c = 0; c < m; ++c) v += x[c] * basis[static_cast<std::size_t>(c)].values[k];
        out.fit.values[k] = v;
    }
    double num = 0.0;
    double den = 0.0;
    for (const std::size_t k : nodes) {
        num += (f.values[k] - out.fit.values[k]) * (f.values[k] - out.fit.values[k]);
        den += f.values[k] * f.values[k];
    }
    out.residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return out;
}

NodalSet nodal_set(const Field& f, double tau, const Mask* region_in)
{
    const GridDomain& g = *f.domain;
    const Mask region = region_in ? *region_in : eval_mask(g);
    double fmax = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (region[k]) fmax = std::max(fmax, std::abs(f.values[k]));
    if (!(fmax > 0.0)) throw DegenerateError("nodal_set: field vanishes on the region");

    NodalSet ns;
    ns.tau = tau;
    ns.nodes.assign(g.size(), false);
    const double small = tau * fmax;
    const double h = g.h();
    auto add_cell = [&](int i, int j, std::initializer_list<std::size_t> corners) {
        ns.cells.push_back({i, j});
        for (const std::size_t q : corners) ns.nodes[q] = true;
    };

    if (g.dim() == 1) {
        // a sign change may pass through nodes where f is exactly zero (underflow
        // of (|F|/e)^(p-1) at large p); it is placed at the middle of the zero run
        int last_i = -1;
        double last_v = 0.0;
        for (int i = 0; i < g.nx(); ++i) {
            const std::size_t k = g.index(i);
            if (!region[k]) {
                last_i = -1;
                continue;
            }
            if (i + 1 < g.nx() && region[g.index(i + 1)]) {
                ++ns.region_cells;
                if (std::abs(f.values[k]) < small || std::abs(f.values[g.index(i + 1)]) < small)
                    add_cell(i, 0, {k, g.index(i + 1)});
            }
            const double v = f.values[k];
            if (v == 0.0) continue;
            if (last_i >= 0 && (v > 0.0) != (last_v > 0.0)) {
                const double x0 = g.point(g.index(last_i)).x;
                ns.crossings.push_back(i == last_i + 1 ? x0 + h * last_v / (last_v - v)
                                                       : 0.5 * (x0 + g.point(k).x));
                for (int c = last_i; c < i; ++c)
                    if (ns.cells.empty() || ns.cells.back()[0] != c) add_cell(c, 0, {g.index(c), g.index(c + 1)});
            }
            last_i = i;
            last_v = v;
        }
        std::sort(ns.cells.begin(), ns.cells.end());
        ns.cells.erase(std::unique(ns.cells.begin(), ns.cells.end()), ns.cells.end());
    } else {
        for (int j = 0; j + 1 < g.ny(); ++j) {
            for (int i = 0; i + 1 < g.nx(); ++i) {
                const std::array<std::size_t, 4> c{g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1),
                                                   g.index(i, j + 1)};
                if (!region[c[0]] || !region[c[1]] || !region[c[2]] || !region[c[3]]) continue;
                ++ns.region_cells;
                std::array<double, 4> v{};
                bool pos = false;
                bool neg = false;
                bool tiny = false;
                for (int q = 0; q < 4; ++q) {
                    v[q] = f.values[c[q]];
                    pos = pos || v[q] > 0.0;
                    neg = neg || v[q] < 0.0;
                    tiny = tiny || std::abs(v[q]) < small;
                }
                if (pos && neg) {
                    // edges in order bottom, right, top, left; corners counterclockwise from (i, j)
                    std::array<Point, 4> cut{};
                    std::array<bool, 4> has{};
                    int count = 0;
                    for (int e = 0; e < 4; ++e) {
                        const int q0 = e;
                        const int q1 = (e + 1) % 4;
                        if ((v[q0] > 0.0) == (v[q1] > 0.0)) continue;
                        const double t = v[q0] / (v[q0] - v[q1]);
                        const Point p0 = g.point(c[q0]);
                        const Point p1 = g.point(c[q1]);
                        cut[e] = {p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y)};
                        has[e] = true;
                        ++count;
                    }
                    if (count == 2) {
                        std::array<Point, 2> seg{};
                        int n = 0;
                        for (int e = 0; e < 4; ++e)
                            if (has[e]) seg[n++] = cut[e];
                        ns.segments.push_back(seg);
                    } else if (count == 4) {
                        const double centre = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                        if ((centre > 0.0) == (v[0] > 0.0)) {
                            ns.segments.push_back({cut[0], cut[1]});
                            ns.segments.push_back({cut[2], cut[3]});
                        } else {
                            ns.segments.push_back({cut[3], cut[0]});
                            ns.segments.push_back({cut[1], cut[2]});
                        }
                    }
                }
                if ((pos && neg) || tiny) add_cell(i, j, {c[0], c[1], c[2], c[3]});
            }
        }
    }
    ns.cell_fraction = ns.region_cells ? static_cast<double>(ns.cells.size()) / static_cast<double>(ns.region_cells) : 0.0;
    return ns;
}

Mask dilate(const GridDomain& g, const Mask& nodes)
{
    Mask out = nodes;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!nodes[k]) continue;
        const auto nb = g.neighbours(k);
        for (int q = 0; q < g.neighbour_count(); ++q)
            if (nb[q] >= 0) out[static_cast<std::size_t>(nb[q])] = true;
    }
    return out;
}

double RepresentationCheck::fraction_within(double e, double rel) const
{
    if (nodes == 0) return 1.0;
    std::size_t ok = 0;
    for (std::size_t k = 0; k < checked.size(); ++k)
        if (checked[k] && residual.values[k] <= rel * e) ++ok;
    return static_cast<double>(ok) / static_cast<double>(nodes);
}

RepresentationCheck representation_residual(const Field& u, const FModel& model, double e, const Field& f,
                                            const NodalSet& band)
{
    if (e < 0.0) throw ConfigError("representation_residual: e must be >= 0");
    const GridDomain& g = *u.domain;
    const Mask excluded = band.nodes.empty() ? Mask(g.size(), false) : dilate(g, band.nodes);
    RepresentationCheck rc;
    rc.residual = Field(u.domain);
    rc.checked.assign(g.size(), false);
    for (const std::size_t k : g.eval_nodes()) {
        if (excluded[k] || sgn(f.values[k]) == 0) continue;
        const double F = model.eval(g.point(k), laplacian_at(u, k));
        const double r = std::abs(F - e * sgn(f.values[k]));
        rc.residual.values[k] = r;
        rc.checked[k] = true;
        rc.sup = std::max(rc.sup, r);
        ++rc.nodes;
    }
    return rc;
}

ELResidual el_residual(const Field& u, const FModel& model)
{
    const GridDomain& g = *u.domain;
    const Mask ev = eval_mask(g);
    Field F(u.domain);
    Field F1(u.domain);
    Field F2sq(u.domain);
    for (const std::size_t k : g.eval_nodes()) {
        const Point x = g.point(k);
        const double xi = laplacian_at(u, k);
        F.values[k] = model.eval(x, xi);
        F1.values[k] = model.d1(x, xi);
        F2sq.values[k] = F.values[k] * F.values[k];
    }
    const VectorField grad = gradient(F2sq, &ev);
    ELResidual out;
    out.R = Field(u.domain);
    double sum = 0.0;
    for (const std::size_t k : g.eval_nodes()) {
        const auto nb = g.neighbours(k);
        bool full = true;
        for (int q = 0; q < g.neighbour_count(); ++q) full = full && nb[q] >= 0 && ev[static_cast<std::size_t>(nb[q])];
        if (!full) continue;
        const double gx = grad.x.values[k];
        const double gy = grad.y.values[k];
        const double R = F.values[k] * F1.values[k] * (gx * gx + gy * gy);
        out.R.values[k] = R;
        out.sup = std::max(out.sup, std::abs(R));
        sum += std::abs(R);
        ++out.nodes;
    }
    out.mean = out.nodes ? sum / static_cast<double>(out.nodes) : 0.0;
    return out;
}

namespace {

struct IndexBox {
    int i0 = 0;
    int i1 = 0;
    int j0 = 0;
    int j1 = 0;
};

bool box_inside(const GridDomain& g, const IndexBox& b)
{
    for (int j = b.j0; j <= b.j1; ++j)
        for (int i = b.i0; i <= b.i1; ++i)
            if (!g.in_domain(g.index(i, j))) return false;
    return true;
}

int snap(double v, double lo, double h, const char* what)
{
    const double t = (v - lo) / h;
    const long r = std::lround(t);
    if (std::abs(t - static_cast<double>(r)) > 1e-6) {
        std::ostringstream msg;
        msg << "probe: " << what << " = " << v << " is not a grid coordinate";
        throw ConfigError(msg.str());
    }
    return static_cast<int>(r);
}

std::vector<IndexBox> probe_boxes(const GridDomain& g, const ProbeConfig& cfg)
{
    std::vector<IndexBox> out;
    const int mc = cfg.min_cells;
    const bool two_d = g.dim() == 2;
    if (!cfg.boxes.empty()) {
        for (const auto& b : cfg.boxes) {
            IndexBox ib;
            ib.i0 = snap(b.lower.x, g.lower().x, g.h(), "lower x");
            ib.i1 = snap(b.upper.x, g.lower().x, g.h(), "upper x");
            if (two_d) {
                ib.j0 = snap(b.lower.y, g.lower().y, g.h(), "lower y");
                ib.j1 = snap(b.upper.y, g.lower().y, g.h(), "upper y");
            }
            if (ib.i0 < 0 || ib.i1 >= g.nx() || ib.j0 < 0 || ib.j1 >= g.ny())
                throw ConfigError("probe: box leaves the grid");
            if (ib.i1 - ib.i0 < mc || (two_d && ib.j1 - ib.j0 < mc))
                throw ConfigError("probe: box has fewer cells per side than the minimum");
            if (!box_inside(g, ib)) throw ConfigError("probe: box leaves the domain");
            out.push_back(ib);
        }
        return out;
    }
    if (g.nx() - 1 < mc || (two_d && g.ny() - 1 < mc)) throw ConfigError("probe: grid smaller than the minimum box");
    std::mt19937_64 rng(cfg.seed);
    auto pick = [&](int n_nodes, int& lo, int& hi) {
        const auto cells = static_cast<std::uint64_t>(n_nodes - 1);
        const int len = mc + static_cast<int>(rng() % (cells - static_cast<std::uint64_t>(mc) + 1));
        lo = static_cast<int>(rng() % (cells - static_cast<std::uint64_t>(len) + 1));
        hi = lo + len;
    };
    for (int n = 0; n < cfg.count; ++n) {
        for (int attempt = 0; attempt < 10000; ++attempt) {
            IndexBox ib;
            pick(g.nx(), ib.i0, ib.i1);
            if (two_d) pick(g.ny(), ib.j0, ib.j1);
            if (box_inside(g, ib)) {
                out.push_back(ib);
                break;
            }
        }
    }
    return out;
}

}  // namespace

ProbeReport minimality_probe(const Field& u, const FModel& model, const ProbeConfig& cfg)
{
    const GridDomain& g = *u.domain;
    ProbeReport rep;
    rep.p = cfg.p;
    for (const IndexBox& ib : probe_boxes(g, cfg)) {
        ProbeOutcome out;
        const Point lo = g.point(g.index(ib.i0, ib.j0));
        const Point hi = g.point(g.index(ib.i1, ib.j1));
        out.box = {lo, hi};
        out.cells_x = ib.i1 - ib.i0;
        out.cells_y = ib.j1 - ib.j0;
        try {
            const DomainPtr sub = g.dim() == 1 ? GridDomain::interval(lo.x, hi.x, out.cells_x + 1)
                                               : GridDomain::rectangle(lo.x, hi.x, lo.y, hi.y, out.cells_x + 1);
            Field u_sub(sub);
            for (std::size_t k = 0; k < sub->size(); ++k)
                u_sub.values[k] = u.values[g.index(ib.i0 + sub->ix(k), ib.j0 + sub->iy(k))];
            LpProblem problem{sub, model, u_sub, cfg.p};
            out.e_restricted = energy(problem, u_sub).e_p;
            ContinuationSchedule schedule;
            schedule.p_max = cfg.p;
            schedule.stop_rel_e = 0.0;
            const ContinuationTrace trace = run_continuation(problem, schedule, cfg.solver);
            out.e_sub = trace.last().e_p;
            out.delta_e = out.e_restricted - out.e_sub;
            out.pass = out.delta_e <= cfg.tol_abs + cfg.tol_rel * out.e_restricted;
        } catch (const Error& e) {
            out.pass = false;
            out.error = e.what();
        }
        log::info("probe [%g, %g]x[%g, %g]: e_restricted=%.6g e_sub=%.6g delta=%.3g %s", lo.x, hi.x, lo.y, hi.y,
                  out.e_restricted, out.e_sub, out.delta_e, out.pass ? "PASS" : "FAIL");
        rep.max_delta_e = std::max(rep.max_delta_e, out.delta_e);
        rep.pass = rep.pass && out.pass;
        rep.probes.push_back(std::move(out));
    }
    return rep;
}

DualBounds dual_bounds(const Field& f, double p, const FModel& model)
{
    const GridDomain& g = *f.domain;
    DualBounds b;
    b.bound = 1.0 / model.c;
    const auto n = static_cast<double>(g.eval_nodes().size());
    if (n == 0.0) return b;
    const double pp = p / (p - 1.0);
    double s1 = 0.0;
    std::vector<double> a;
    for (const std::size_t k : g.eval_nodes()) {
        s1 += std::abs(f.values[k]);
        a.push_back(f.values[k]);
    }
    b.l1_mean = s1 / n;
    b.lpprime_mean = power_mean(a, pp);
    return b;
}

std::size_t sign_mismatches(const Field& u, const Field& f)
{
    const GridDomain& g = *u.domain;
    std::size_t n = 0;
    for (const std::size_t k : g.eval_nodes()) {
        const int su = sgn(laplacian_at(u, k));
        const int sf = sgn(f.values[k]);
        if (su != 0 && sf != 0 && su != sf) ++n;
    }
    return n;
}

Pairing pairing_diagnostic(const LpProblem& problem, const Field& f, double e_p, double epsilon)
{
    const GridDomain& g = *problem.domain;
    const SmootherResult sm = build_w(problem.u0, epsilon);
    Pairing out;
    out.smoother_r = sm.r;
    out.smoother_sup = sm.measured_sup;
    const double vol = g.cell_volume();
    for (const std::size_t k : g.eval_nodes()) {
        const double term = f.values[k] * laplacian_at(sm.w, k) * vol;
        out.value += term;
        if (g.distance_at(k) < sm.r) out.zone_part += term;
    }
    out.bound = problem.model.c * problem.model.c * g.measure() * e_p;
    return out;
}

StructureReport analyze(const LpProblem& base, const ContinuationTrace& trace, const StructureOptions& opt)
{
    if (trace.steps.empty()) throw DegenerateError("analyze: empty continuation trace");
    const GridDomain& g = *base.domain;
    const ContinuationStep& last = trace.last();
    StructureReport rep;
    rep.e_inf = trace.e_inf_estimate;
    rep.aitken = trace.aitken;
    rep.p = last.p;

    const Mask free = free_mask(g);
    rep.harmonic_residual_raw = harmonic_residual(last.f, free);

    const double r_in = opt.interior_r > 0.0 ? opt.interior_r : 5.0 * g.h();
    Mask interior(g.size(), false);
    for (const std::size_t k : g.eval_nodes()) interior[k] = g.distance_at(k) >= r_in;
    const auto basis = harmonic_basis(base.domain, g.dim() == 1 ? 1 : opt.fit_degree);
    rep.fit = fit_harmonic(last.f, basis, interior);
    rep.harmonic_residual_fit = harmonic_residual(rep.fit.fit, free);

    bool pos = false;
    bool neg = false;
    for (const std::size_t k : g.eval_nodes()) {
        const double v = rep.fit.fit.values[k];
        rep.fit_sup = std::max(rep.fit_sup, std::abs(v));
        pos = pos || v > 0.0;
        neg = neg || v < 0.0;
    }
    rep.fit_constant_sign = pos != neg;

    if (rep.fit_sup > 0.0) rep.nodal = nodal_set(rep.fit.fit, opt.tau);
    // sgn f_p = sgn F pointwise, so the band of the raw field is its sign-change cells
    bool nonzero = false;
    for (const std::size_t k : g.eval_nodes()) nonzero = nonzero || last.f.values[k] != 0.0;
    if (nonzero) rep.dual_nodal = nodal_set(last.f, 0.0);
    rep.representation =
        representation_residual(last.u, base.model, rep.e_inf, last.f, rep.dual_nodal ? *rep.dual_nodal : NodalSet{});
    rep.el = el_residual(last.u, base.model);
    rep.dual = dual_bounds(last.f, last.p, base.model);
    rep.sign_mismatch = sign_mismatches(last.u, last.f);
    // the smoother needs a boundary zone at least four cells wide
    if (opt.pairing_epsilon > 0.0 && 0.25 * g.inradius() >= 4.0 * g.h()) {
        LpProblem pb = base;
        pb.p = last.p;
        rep.pairing = pairing_diagnostic(pb, last.f, last.e_p, opt.pairing_epsilon);
    }
    if (opt.probe) rep.probe = minimality_probe(last.u, base.model, *opt.probe);
    return rep;
}

}  // namespace linf
