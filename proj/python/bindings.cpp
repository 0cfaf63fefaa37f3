#include "linf/continuation.hpp"
#include "linf/error.hpp"
#include "linf/expr.hpp"
#include "linf/fmodel.hpp"
#include "linf/grid.hpp"
#include "linf/lp_min.hpp"
#include "linf/oracle1d.hpp"
#include "linf/run.hpp"
#include "linf/smoother.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace linf;

namespace {

/// pybind11 holders cannot point to const; the bindings never mutate a grid.
using Dom = std::shared_ptr<GridDomain>;

Dom mutable_ptr(DomainPtr d) { return std::const_pointer_cast<GridDomain>(d); }

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<py::ssize_t> shape_of(const GridDomain& g)
{
    if (g.dim() == 1) return {g.nx()};
    return {g.ny(), g.nx()};
}

Array to_array(const Field& f)
{
    Array out(shape_of(*f.domain));
    std::memcpy(out.mutable_data(), f.values.data(), f.values.size() * sizeof(double));
    return out;
}

Array mask_array(const GridDomain& g, const std::function<bool(std::size_t)>& pred)
{
    Array out(shape_of(g));
    double* p = out.mutable_data();
    for (std::size_t k = 0; k < g.size(); ++k) p[k] = pred(k) ? 1.0 : 0.0;
    return out;
}

/// Copies an array onto the domain; the shape must match the node layout.
Field to_field(const Dom& d, const Array& a)
{
    if (static_cast<std::size_t>(a.size()) != d->size())
        throw ConfigError("array has " + std::to_string(a.size()) + " entries, the grid has " + std::to_string(d->size()) + " nodes");
    if (d->dim() == 2 && a.ndim() == 2 && (a.shape(0) != d->ny() || a.shape(1) != d->nx()))
        throw ConfigError("2D arrays must have shape (ny, nx)");
    Field f(d);
    std::memcpy(f.values.data(), a.data(), f.values.size() * sizeof(double));
    return f;
}

py::dict step_dict(const ContinuationStep& s, bool fields)
{
    py::dict d("p"_a = s.p, "e_p"_a = s.e_p, "maxF"_a = s.maxF, "iterations"_a = s.iterations,
               "grad_norm"_a = s.grad_norm, "grad_rel"_a = s.grad_rel, "f_drift"_a = s.f_drift);
    if (fields) {
        d["u"] = to_array(s.u);
        d["f"] = to_array(s.f);
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Core of linfmin: grids, models, the L^p solver, continuation, the interval oracle and the smoother.";

    auto base = py::register_exception<Error>(m, "LinfError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<SolverError>(m, "SolverError", base.ptr());
    py::register_exception<ModelError>(m, "ModelError", base.ptr());
    py::register_exception<DegenerateError>(m, "DegenerateError", base.ptr());

    py::class_<GridDomain, Dom>(m, "Domain")
        .def_static("interval", [](double a, double b, int n) { return mutable_ptr(GridDomain::interval(a, b, n)); }, "a"_a, "b"_a, "n"_a)
        .def_static("rectangle", [](double x0, double x1, double y0, double y1, int nx) { return mutable_ptr(GridDomain::rectangle(x0, x1, y0, y1, nx)); }, "x0"_a, "x1"_a, "y0"_a, "y1"_a, "nx"_a)
        .def_static("disk", [](double cx, double cy, double r, int n) { return mutable_ptr(GridDomain::disk({cx, cy}, r, n)); },
                    "cx"_a, "cy"_a, "radius"_a, "n"_a)
        .def_property_readonly("dim", &GridDomain::dim)
        .def_property_readonly("h", &GridDomain::h)
        .def_property_readonly("shape", [](const GridDomain& g) { return py::tuple(py::cast(shape_of(g))); })
        .def_property_readonly("inradius", &GridDomain::inradius)
        .def("coordinates",
             [](const Dom& d) {
                 Field x = Field::sample(d, [](Point p) { return p.x; });
                 Field y = Field::sample(d, [](Point p) { return p.y; });
                 if (d->dim() == 1) return py::tuple(py::make_tuple(to_array(x)));
                 return py::tuple(py::make_tuple(to_array(x), to_array(y)));
             })
        .def("free_mask", [](const GridDomain& g) { return mask_array(g, [&](std::size_t k) { return g.is_free(k); }).attr("astype")("bool"); })
        .def("eval_mask", [](const GridDomain& g) { return mask_array(g, [&](std::size_t k) { return g.is_eval(k); }).attr("astype")("bool"); })
        .def("distance", [](const Dom& d) { return to_array(distance(d)); })
        .def(
            "sample",
            [](const Dom& d, const std::string& expr) {
                const Expression e(expr);
                return to_array(Field::sample(d, [&](Point p) { return e(p.x, p.y); }));
            },
            "expression"_a, "Evaluates an arithmetic expression in x (and y) at the in-domain nodes.");

    py::class_<FModel>(m, "Model")
        .def_static("linear", &make_linear)
        .def_static("arctan_tilt", &make_arctan_tilt, "epsilon"_a)
        .def_static(
            "weighted",
            [](const std::string& a_expr, double c) {
                const Expression e(a_expr);
                return make_weighted([e](Point p) { return e(p.x, p.y); }, c, a_expr);
            },
            "a"_a, "c"_a)
        .def_readonly("id", &FModel::id)
        .def_readonly("c", &FModel::c)
        .def("__call__", [](const FModel& f, double xi, double x, double y) { return f.eval({x, y}, xi); }, "xi"_a,
             "x"_a = 0.0, "y"_a = 0.0)
        .def("d1", [](const FModel& f, double xi, double x, double y) { return f.d1({x, y}, xi); }, "xi"_a, "x"_a = 0.0,
             "y"_a = 0.0)
        .def("invert", [](const FModel& f, double v, double x, double y) { return invert(f, {x, y}, v); }, "value"_a,
             "x"_a = 0.0, "y"_a = 0.0)
        .def("convexity_exponent", &FModel::convexity_exponent)
        .def(
            "check",
            [](const FModel& f, int dim) {
                const Sampler s = Sampler::box({0.0, 0.0}, {1.0, 1.0}, dim, dim == 1 ? 10 : 4);
                const ModelReport a = check_assumptions(f, s);
                const ModelReport l = check_consequences(f, f.convexity_exponent(), s);
                return py::dict("assumptions"_a = a.violations.size(), "consequences"_a = l.violations.size(),
                                "samples"_a = a.samples);
            },
            "dim"_a = 1, "Number of sampled violations of the model bounds and their consequences on the unit box.");

    m.def("power_mean", [](const Array& v, double p) { return power_mean({v.data(), static_cast<std::size_t>(v.size())}, p); },
          "values"_a, "p"_a);

    m.def("laplacian", [](const Dom& d, const Array& u) { return to_array(laplacian(to_field(d, u))); }, "domain"_a,
          "u"_a);

    m.def(
        "energy",
        [](const Dom& d, const FModel& model, const Array& u, double p) {
            const LpProblem pb{d, model, to_field(d, u), p};
            const EnergyValue e = energy(pb, pb.u0);
            return py::make_tuple(e.e_p, e.maxF);
        },
        "domain"_a, "model"_a, "u"_a, "p"_a, "(E_p, max |F|) over the evaluation nodes.");

    m.def(
        "minimize",
        [](const Dom& d, const FModel& model, const Array& u0, double p, double tol_grad, int max_iter) {
            const LpProblem pb{d, model, to_field(d, u0), p};
            SolverConfig cfg;
            cfg.tol_grad = tol_grad;
            cfg.max_iter = max_iter;
            LpSolution s;
            {
                py::gil_scoped_release release;
                s = minimize(pb, pb.u0, cfg);
            }
            return py::dict("u"_a = to_array(s.u), "f"_a = to_array(s.f), "e_p"_a = s.e_p, "maxF"_a = s.maxF,
                            "grad_norm"_a = s.grad_norm, "iterations"_a = s.iterations, "converged"_a = s.converged);
        },
        "domain"_a, "model"_a, "u0"_a, "p"_a, "tol_grad"_a = 1e-9, "max_iter"_a = 200,
        "Minimises E_p among fields with the clamped data of u0, starting from u0.");

    m.def(
        "continuation",
        [](const Dom& d, const FModel& model, const Array& u0, double p_start, double p_max, double growth,
           double stop_rel_e) {
            const LpProblem pb{d, model, to_field(d, u0), 2.0};
            ContinuationSchedule sch;
            sch.p_start = p_start;
            sch.p_max = p_max;
            sch.growth = growth;
            sch.stop_rel_e = stop_rel_e;
            ContinuationTrace t;
            {
                py::gil_scoped_release release;
                t = run_continuation(pb, sch);
            }
            py::list steps;
            for (const auto& s : t.steps) steps.append(step_dict(s, false));
            return py::dict("steps"_a = steps, "last"_a = step_dict(t.last(), true), "e_inf"_a = t.e_inf_estimate,
                            "aitken"_a = t.aitken, "monotone"_a = t.monotone, "early_stop"_a = t.early_stop);
        },
        "domain"_a, "model"_a, "u0"_a, "p_start"_a = 0.0, "p_max"_a = 1024.0, "growth"_a = 2.0, "stop_rel_e"_a = 1e-3);

    m.def(
        "oracle",
        [](double ua, double dua, double ub, double dub, double a, double b, const std::optional<FModel>& model) {
            Oracle1DProblem pb;
            pb.a = a;
            pb.b = b;
            pb.ua = ua;
            pb.dua = dua;
            pb.ub = ub;
            pb.dub = dub;
            if (model) pb.model = *model;
            const Oracle1DSolution s = solve_general(pb);
            return py::dict("e"_a = s.e, "m"_a = s.m, "sigma"_a = s.sigma, "crossing"_a = s.crossing,
                            "residual"_a = py::make_tuple(s.residual[0], s.residual[1]));
        },
        "ua"_a, "dua"_a, "ub"_a, "dub"_a, "a"_a = 0.0, "b"_a = 1.0, "model"_a = py::none(),
        "Minimal energy e and interface m of the interval problem with clamped data (u, u') at a and b.");

    m.def(
        "build_w",
        [](const Dom& d, const Array& u0, double epsilon) {
            const SmootherResult s = build_w(to_field(d, u0), epsilon);
            return py::dict("w"_a = to_array(s.w), "r"_a = s.r, "r0"_a = s.r0, "delta"_a = s.delta,
                            "measured_sup"_a = s.measured_sup, "success"_a = s.success);
        },
        "domain"_a, "u0"_a, "epsilon"_a);

    m.def(
        "_run",
        [](const std::string& command, const std::string& path, const std::string& solution, double p,
           std::optional<double> epsilon) {
            CommandResult r;
            {
                py::gil_scoped_release release;
                r = guarded([&]() -> CommandResult {
                    const RunConfig cfg = parse_config(path);
                    if (command == "check-model") return cmd_check_model(cfg);
                    if (command == "solve") return cmd_solve(cfg);
                    if (command == "oracle") return cmd_oracle(cfg);
                    if (command == "analyze") return cmd_analyze(cfg, solution, p);
                    if (command == "probe") return cmd_probe(cfg, solution);
                    if (command == "smooth") return cmd_smooth(cfg, epsilon);
                    throw ConfigError("unknown command '" + command + "'");
                });
            }
            return py::make_tuple(r.exit_code, r.report.dump());
        },
        "command"_a, "config"_a, "solution"_a = "", "p"_a = 0.0, "epsilon"_a = py::none());
}
