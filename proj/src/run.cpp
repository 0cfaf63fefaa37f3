#include "linf/run.hpp"

#include "linf/error.hpp"
#include "linf/field_io.hpp"
#include "linf/log.hpp"
#include "linf/oracle1d.hpp"
#include "linf/smoother.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>

namespace linf {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// NaN and infinities are not valid JSON numbers.
json num(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

json point(Point p, int dim)
{
    if (dim == 1) return json::array({num(p.x)});
    return json::array({num(p.x), num(p.y)});
}

json domain_json(const GridDomain& g)
{
    json j;
    j["kind"] = g.kind() == DomainKind::interval ? "interval" : g.kind() == DomainKind::rectangle ? "rectangle" : "disk";
    j["nx"] = g.nx();
    j["ny"] = g.ny();
    j["h"] = g.h();
    j["free_nodes"] = g.free_nodes().size();
    j["eval_nodes"] = g.eval_nodes().size();
    j["lower"] = point(g.lower(), g.dim());
    j["upper"] = point(g.upper(), g.dim());
    if (g.kind() == DomainKind::disk) {
        j["center"] = point(g.center(), 2);
        j["radius"] = g.radius();
    }
    return j;
}

json model_json(const FModel& m)
{
    json j;
    j["id"] = m.id;
    j["c"] = m.c;
    for (const auto& [k, v] : m.params) j["params"][k] = v;
    return j;
}

json config_json(const RunConfig& cfg)
{
    json j = json::object();
    for (const auto& [k, v] : cfg.entries) j[k] = v;
    return j;
}

json probe_json(const ProbeReport& r)
{
    json j;
    j["p"] = r.p;
    j["pass"] = r.pass;
    j["max_delta_e"] = num(r.max_delta_e);
    j["probes"] = json::array();
    for (const auto& o : r.probes) {
        json q;
        q["lower"] = json::array({o.box.lower.x, o.box.lower.y});
        q["upper"] = json::array({o.box.upper.x, o.box.upper.y});
        q["cells"] = json::array({o.cells_x, o.cells_y});
        q["e_restricted"] = num(o.e_restricted);
        q["e_sub"] = num(o.e_sub);
        q["delta_e"] = num(o.delta_e);
        q["pass"] = o.pass;
        if (!o.error.empty()) q["error"] = o.error;
        j["probes"].push_back(q);
    }
    return j;
}

bool probe_errored(const ProbeReport& r)
{
    for (const auto& o : r.probes)
        if (!o.error.empty()) return true;
    return false;
}

json structure_json(const StructureReport& s)
{
    json j;
    j["e_inf"] = num(s.e_inf);
    j["aitken"] = num(s.aitken);
    j["p"] = s.p;
    j["harmonic_residual_raw"] = num(s.harmonic_residual_raw);
    j["harmonic_residual_fit"] = num(s.harmonic_residual_fit);
    j["fit"]["coefficients"] = s.fit.coefficients;
    j["fit"]["residual"] = num(s.fit.residual);
    j["fit"]["sup"] = num(s.fit_sup);
    j["fit"]["constant_sign"] = s.fit_constant_sign;
    if (s.nodal) {
        j["nodal_set"]["tau"] = s.nodal->tau;
        j["nodal_set"]["cells"] = s.nodal->cells.size();
        j["nodal_set"]["cell_fraction"] = num(s.nodal->cell_fraction);
        j["nodal_set"]["crossings"] = s.nodal->crossings;
        j["nodal_set"]["segments"] = s.nodal->segments.size();
    } else {
        j["nodal_set"] = nullptr;
    }
    j["dual_nodal_cells"] = s.dual_nodal ? s.dual_nodal->cells.size() : 0;
    j["representation"]["sup"] = num(s.representation.sup);
    j["representation"]["nodes"] = s.representation.nodes;
    j["representation"]["fraction_within_10pct"] = num(s.representation.fraction_within(s.e_inf, 0.1));
    j["el_residual"]["sup"] = num(s.el.sup);
    j["el_residual"]["mean"] = num(s.el.mean);
    j["dual"]["l1_mean"] = num(s.dual.l1_mean);
    j["dual"]["lpprime_mean"] = num(s.dual.lpprime_mean);
    j["dual"]["bound"] = num(s.dual.bound);
    j["sign_mismatches"] = s.sign_mismatch;
    if (s.pairing) {
        j["pairing"]["value"] = num(s.pairing->value);
        j["pairing"]["bound"] = num(s.pairing->bound);
        j["pairing"]["zone_part"] = num(s.pairing->zone_part);
        j["pairing"]["smoother_r"] = num(s.pairing->smoother_r);
        j["pairing"]["smoother_sup"] = num(s.pairing->smoother_sup);
    }
    if (s.probe) j["probe"] = probe_json(*s.probe);
    return j;
}

json oracle_json(const Oracle1DSolution& s)
{
    json j;
    j["e"] = s.e;
    j["m"] = s.m;
    j["sigma"] = s.sigma;
    j["crossing"] = s.crossing;
    j["residuals"] = json::array({s.residual[0], s.residual[1]});
    return j;
}

std::ofstream open_text(const fs::path& p)
{
    std::ofstream out(p);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << std::setprecision(17);
    return out;
}

void write_json(const fs::path& p, const json& j)
{
    auto out = open_text(p);
    out << j.dump(2) << '\n';
}

fs::path prepare_dir(const RunConfig& cfg)
{
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir / "fields");
    fs::create_directories(dir / "plotdata");
    return dir;
}

void write_echo(const fs::path& dir, const RunConfig& cfg)
{
    auto out = open_text(dir / "config.echo");
    out << "# source: " << cfg.source << '\n';
    for (const auto& [k, v] : cfg.entries) out << k << " = " << v << '\n';
}

void write_field_pair(const fs::path& dir, const std::string& stem, const Field& f)
{
    write_field_csv(f, (dir / "fields" / (stem + ".csv")).string());
    write_field_bin(f, (dir / "fields" / (stem + ".bin")).string());
}

std::string p_tag(double p)
{
    std::ostringstream s;
    s << p;
    return s.str();
}

/// Per-node profiles of Delta_h u, F, f and the fit for plotting.
void write_profiles(const fs::path& dir, const LpProblem& problem, const ContinuationStep& last,
                    const StructureReport& s)
{
    const GridDomain& g = *problem.domain;
    auto out = open_text(dir / "plotdata" / "profile.csv");
    out << (g.dim() == 1 ? "x" : "x,y") << ",laplacian_u,F,f_p,f_fit\n";
    for (const std::size_t k : g.eval_nodes()) {
        const Point x = g.point(k);
        const double xi = laplacian_at(last.u, k);
        out << x.x;
        if (g.dim() == 2) out << ',' << x.y;
        out << ',' << xi << ',' << problem.model.eval(x, xi) << ',' << last.f.values[k] << ','
            << s.fit.fit.values[k] << '\n';
    }
    auto poly = open_text(dir / "plotdata" / "gamma_polyline.csv");
    if (g.dim() == 1) {
        poly << "x\n";
        if (s.nodal)
            for (const double c : s.nodal->crossings) poly << c << '\n';
    } else {
        poly << "x0,y0,x1,y1\n";
        if (s.nodal)
            for (const auto& seg : s.nodal->segments)
                poly << seg[0].x << ',' << seg[0].y << ',' << seg[1].x << ',' << seg[1].y << '\n';
    }
    auto cells = open_text(dir / "nodal_set.csv");
    cells << "i,j,x,y\n";
    if (s.nodal) {
        const double h = g.h();
        for (const auto& c : s.nodal->cells) {
            const Point p = g.point(g.index(c[0], c[1]));
            cells << c[0] << ',' << c[1] << ',' << p.x + 0.5 * h << ',' << (g.dim() == 2 ? p.y + 0.5 * h : 0.0) << '\n';
        }
    }
}

json trace_json(const ContinuationTrace& t)
{
    json steps = json::array();
    for (const auto& s : t.steps) {
        json j;
        j["p"] = s.p;
        j["e_p"] = num(s.e_p);
        j["maxF"] = num(s.maxF);
        j["iterations"] = s.iterations;
        j["grad_norm"] = num(s.grad_norm);
        j["grad_rel"] = num(s.grad_rel);
        j["f_drift"] = num(s.f_drift);
        steps.push_back(j);
    }
    json j;
    j["steps"] = steps;
    j["e_inf_estimate"] = num(t.e_inf_estimate);
    j["aitken"] = num(t.aitken);
    j["monotone"] = t.monotone;
    j["early_stop"] = t.early_stop;
    return j;
}

void write_trace_csv(const fs::path& dir, const ContinuationTrace& t)
{
    auto out = open_text(dir / "trace.csv");
    out << "p,e_p,iterations,grad_norm,f_drift\n";
    for (const auto& s : t.steps) {
        out << s.p << ',' << s.e_p << ',' << s.iterations << ',' << s.grad_norm << ',';
        if (std::isfinite(s.f_drift)) out << s.f_drift;
        out << '\n';
    }
}

ModelReport sample_model(const FModel& model, const GridDomain& g, bool consequences)
{
    const Sampler sampler = Sampler::box(g.lower(), g.upper(), g.dim(), g.dim() == 1 ? 11 : 5);
    if (!consequences) return check_assumptions(model, sampler);
    return check_consequences(model, model.convexity_exponent(), sampler);
}

json model_report_json(const ModelReport& r)
{
    json j;
    j["passed"] = r.passed;
    j["samples"] = r.samples;
    j["violations"] = r.violations.size();
    json list = json::array();
    for (std::size_t i = 0; i < r.violations.size() && i < 20; ++i) {
        const auto& v = r.violations[i];
        list.push_back({{"inequality", v.inequality}, {"x", json::array({v.x.x, v.x.y})}, {"xi", v.xi}, {"measured", num(v.measured)}});
    }
    j["first_violations"] = list;
    return j;
}

/// Zero of the 1D dual field: the interpolated crossing if there is exactly
/// one, otherwise argmin |f|.
double dual_zero_1d(const Field& f)
{
    const GridDomain& g = *f.domain;
    try {
        const NodalSet ns = nodal_set(f, 0.0);
        if (ns.crossings.size() == 1) return ns.crossings.front();
    } catch (const DegenerateError&) {
    }
    double best = std::numeric_limits<double>::infinity();
    double x = std::numeric_limits<double>::quiet_NaN();
    for (const std::size_t k : g.eval_nodes())
        if (std::abs(f.values[k]) < best) {
            best = std::abs(f.values[k]);
            x = g.point(k).x;
        }
    return x;
}

}  // namespace

std::array<double, 4> clamped_data_1d(const RunConfig& cfg, const Field& u0)
{
    const GridDomain& g = *u0.domain;
    if (g.dim() != 1) throw ConfigError("clamped data: the oracle is one-dimensional");
    const double a = g.lower().x;
    const double b = g.upper().x;
    const int n = g.nx();
    const double h = g.h();
    std::array<double, 4> d{u0.values[0], 0.0, u0.values[static_cast<std::size_t>(n - 1)], 0.0};
    if (!cfg.u0_expr.empty()) {
        const Expression e(cfg.u0_expr);
        const double s = 1e-4 * (b - a);
        // fourth-order central differences
        auto deriv = [&](double x) {
            return (8.0 * (e(x + s) - e(x - s)) - (e(x + 2.0 * s) - e(x - 2.0 * s))) / (12.0 * s);
        };
        d[0] = e(a);
        d[2] = e(b);
        d[1] = deriv(a);
        d[3] = deriv(b);
        if (std::isfinite(d[1]) && std::isfinite(d[3])) return d;
    }
    const auto& v = u0.values;
    const auto m = static_cast<std::size_t>(n - 1);
    d[1] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[3] = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * h);
    return d;
}

CommandResult guarded(const std::function<CommandResult()>& fn)
{
    try {
        return fn();
    } catch (const ConfigError& e) {
        CommandResult r{exit_config_error, json::object()};
        r.report["error"] = e.what();
        return r;
    } catch (const Error& e) {
        CommandResult r{exit_solver_failure, json::object()};
        r.report["error"] = e.what();
        return r;
    } catch (const std::filesystem::filesystem_error& e) {
        CommandResult r{exit_config_error, json::object()};
        r.report["error"] = e.what();
        return r;
    } catch (const std::exception& e) {
        CommandResult r{exit_solver_failure, json::object()};
        r.report["error"] = e.what();
        return r;
    }
}

CommandResult cmd_check_model(const RunConfig& cfg)
{
    const DomainPtr d = cfg.make_domain();
    const FModel model = cfg.make_model();
    const ModelReport a = sample_model(model, *d, false);
    const ModelReport l = sample_model(model, *d, true);
    CommandResult r;
    r.report["model"] = model_json(model);
    r.report["assumptions"] = model_report_json(a);
    r.report["consequences"] = model_report_json(l);
    r.report["consequences"]["p"] = model.convexity_exponent();
    r.exit_code = a.passed && l.passed ? exit_ok : exit_check_failed;
    const fs::path dir = prepare_dir(cfg);
    write_json(dir / "model_check.json", r.report);
    return r;
}

CommandResult cmd_solve(const RunConfig& cfg)
{
    const auto t0 = Clock::now();
    const DomainPtr d = cfg.make_domain();
    const FModel model = cfg.make_model();
    const LpProblem base{d, model, cfg.make_u0(d), 2.0};
    const fs::path dir = prepare_dir(cfg);
    write_echo(dir, cfg);

    const ModelReport assumptions = sample_model(model, *d, false);
    if (!assumptions.passed)
        throw ModelError("model '" + model.id + "' violates its assumptions (" + assumptions.violations.front().inequality + ")");

    StepCallback snap;
    if (cfg.snapshots)
        snap = [&dir](const ContinuationStep& s) {
            write_field_bin(s.u, (dir / "fields" / ("u_p" + p_tag(s.p) + ".bin")).string());
            write_field_bin(s.f, (dir / "fields" / ("f_p" + p_tag(s.p) + ".bin")).string());
        };
    const ContinuationTrace trace = run_continuation(base, cfg.schedule, cfg.solver, snap);
    const double t_cont = seconds_since(t0);
    const StructureReport s = analyze(base, trace, cfg.structure_options());
    const double t_struct = seconds_since(t0) - t_cont;

    CommandResult r;
    json& rep = r.report;
    rep["config"] = config_json(cfg);
    rep["domain"] = domain_json(*d);
    rep["model"] = model_json(model);
    rep["trace"] = trace_json(trace);
    rep["structure"] = structure_json(s);

    const ContinuationStep& last = trace.last();
    json checks;
    checks["model_assumptions"] = assumptions.passed;
    checks["monotone_energy"] = trace.monotone;
    checks["dual_bound"] = s.dual.lpprime_mean <= s.dual.bound + 1e-8;
    checks["sign_consistency"] = s.sign_mismatch == 0;
    checks["harmonic_vs_gradient"] = s.harmonic_residual_raw <= 10.0 * last.grad_norm + 1e-300;
    if (s.probe) checks["minimality_probe"] = s.probe->pass;

    if (d->dim() == 1) {
        Oracle1DProblem op;
        op.a = d->lower().x;
        op.b = d->upper().x;
        op.model = model;
        const auto data = clamped_data_1d(cfg, base.u0);
        op.ua = data[0];
        op.dua = data[1];
        op.ub = data[2];
        op.dub = data[3];
        const Oracle1DSolution o = solve_general(op);
        json oj = oracle_json(o);
        oj["data"] = data;
        oj["e_rel_error"] = o.e > 0.0 ? num(std::abs(o.e - last.e_p) / o.e) : num(last.e_p);
        if (o.crossing) {
            const double z = dual_zero_1d(last.f);
            oj["solver_crossing"] = num(z);
            oj["crossing_error_h"] = num(std::abs(z - o.m) / d->h());
        }
        rep["oracle"] = oj;
        write_field_csv(reconstruct_u(o, d).u, (dir / "fields" / "u_oracle.csv").string());
    }
    rep["checks"] = checks;

    bool all = true;
    for (const auto& [k, v] : checks.items())
        if (k != "minimality_probe") all = all && v.get<bool>();
    if (s.probe && probe_errored(*s.probe)) r.exit_code = exit_solver_failure;
    else if (s.probe && !s.probe->pass) r.exit_code = exit_non_minimal;
    else r.exit_code = all ? exit_ok : exit_check_failed;
    rep["exit_code"] = r.exit_code;

    write_trace_csv(dir, trace);
    write_field_pair(dir, "u_final", last.u);
    write_field_pair(dir, "f_final", last.f);
    write_field_csv(s.fit.fit, (dir / "fields" / "f_fit.csv").string());
    write_profiles(dir, base, last, s);

    rep["timings"] = {{"continuation_s", t_cont}, {"structure_s", t_struct}, {"total_s", seconds_since(t0)}};
    write_json(dir / "report.json", rep);
    return r;
}

CommandResult cmd_oracle(const RunConfig& cfg)
{
    const DomainPtr d = cfg.make_domain();
    if (d->dim() != 1) throw ConfigError("oracle: only interval domains are supported");
    Oracle1DProblem op;
    op.a = d->lower().x;
    op.b = d->upper().x;
    op.model = cfg.make_model();
    const Field u0 = cfg.make_u0(d);
    const auto data = clamped_data_1d(cfg, u0);
    op.ua = data[0];
    op.dua = data[1];
    op.ub = data[2];
    op.dub = data[3];
    const Oracle1DSolution o = solve_general(op);
    const Reconstruction rec = reconstruct_u(o, d);
    CommandResult r;
    r.report = oracle_json(o);
    r.report["data"] = data;
    r.report["model"] = model_json(op.model);
    r.report["endpoint_mismatch"] = {rec.mismatch_u, rec.mismatch_du};
    const fs::path dir = prepare_dir(cfg);
    write_field_csv(rec.u, (dir / "fields" / "u_oracle.csv").string());
    write_json(dir / "oracle.json", r.report);
    return r;
}

CommandResult cmd_analyze(const RunConfig& cfg, const std::string& solution_path, double p)
{
    const DomainPtr d = cfg.make_domain();
    const FModel model = cfg.make_model();
    LpProblem problem{d, model, cfg.make_u0(d), p > 0.0 ? p : cfg.schedule.p_max};
    const Field u = read_field(solution_path, d);
    ContinuationTrace trace;
    ContinuationStep step;
    step.p = problem.p;
    const EnergyValue ev = energy(problem, u);
    step.e_p = ev.e_p;
    step.maxF = ev.maxF;
    const Stationarity st = stationarity(problem, u);
    step.grad_norm = st.grad_norm;
    step.grad_rel = st.scale > 0.0 ? st.grad_norm / st.scale : 0.0;
    step.grad_floor = st.floor;
    step.f_drift = std::numeric_limits<double>::quiet_NaN();
    step.u = u;
    step.f = dual_field(problem, u, ev.e_p);
    trace.steps.push_back(step);
    trace.e_inf_estimate = trace.aitken = ev.e_p;
    const StructureReport s = analyze(problem, trace, cfg.structure_options());
    CommandResult r;
    r.report["solution"] = solution_path;
    r.report["trace"] = trace_json(trace);
    r.report["structure"] = structure_json(s);
    if (s.probe && probe_errored(*s.probe)) r.exit_code = exit_solver_failure;
    else if (s.probe && !s.probe->pass) r.exit_code = exit_non_minimal;
    const fs::path dir = prepare_dir(cfg);
    write_profiles(dir, problem, step, s);
    write_json(dir / "analysis.json", r.report);
    return r;
}

CommandResult cmd_probe(const RunConfig& cfg, const std::string& solution_path)
{
    const DomainPtr d = cfg.make_domain();
    const FModel model = cfg.make_model();
    const Field u = solution_path.empty() ? cfg.make_u0(d) : read_field(solution_path, d);
    ProbeConfig pc = cfg.probe_config();
    if (pc.count <= 0 && pc.boxes.empty()) pc.count = 8;
    const ProbeReport rep = minimality_probe(u, model, pc);
    CommandResult r;
    r.report = probe_json(rep);
    r.report["solution"] = solution_path.empty() ? "boundary datum" : solution_path;
    r.exit_code = probe_errored(rep) ? exit_solver_failure : rep.pass ? exit_ok : exit_non_minimal;
    const fs::path dir = prepare_dir(cfg);
    write_json(dir / "probe.json", r.report);
    return r;
}

CommandResult cmd_smooth(const RunConfig& cfg, std::optional<double> epsilon)
{
    const DomainPtr d = cfg.make_domain();
    const Field u0 = cfg.make_u0(d);
    const double eps = epsilon.value_or(cfg.smooth_epsilon);
    const SmootherResult s = build_w(u0, eps);
    double drift = 0.0;
    for (std::size_t k = 0; k < d->size(); ++k)
        if (d->is_clamped(k)) drift = std::max(drift, std::abs(s.w.values[k] - u0.values[k]));
    CommandResult r;
    json& j = r.report;
    j["epsilon"] = eps;
    j["r"] = s.r;
    j["r0"] = s.r0;
    j["delta"] = s.delta;
    j["measured_sup"] = s.measured_sup;
    j["success"] = s.success;
    j["clamped_drift"] = drift;
    j["history"] = json::array();
    for (const auto& h : s.history) j["history"].push_back({{"r", h.r}, {"delta", h.delta}, {"measured_sup", h.measured_sup}});
    r.exit_code = s.success ? exit_ok : exit_check_failed;
    const fs::path dir = prepare_dir(cfg);
    write_field_pair(dir, "w", s.w);
    write_json(dir / "smooth.json", j);
    return r;
}

}  // namespace linf
