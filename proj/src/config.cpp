#include "linf/config.hpp"

#include "linf/error.hpp"
#include "linf/field_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace linf {

namespace {

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what)
{
    std::ostringstream msg;
    msg << origin;
    if (line > 0) msg << ":" << line;
    msg << ": " << what;
    throw ConfigError(msg.str());
}

double to_double(const std::string& v, const std::string& key)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
    return out;
}

long to_int(const std::string& v, const std::string& key)
{
    long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& v, const std::string& key)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

/// "x0:x1" in 1D or "x0:x1:y0:y1" in 2D, boxes separated by ';'.
std::vector<ProbeBox> to_boxes(const std::string& v, const std::string& key)
{
    std::vector<ProbeBox> out;
    std::stringstream all(v);
    std::string item;
    while (std::getline(all, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        std::vector<double> xs;
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ':')) xs.push_back(to_double(trim(part), key));
        if (xs.size() == 2) out.push_back({{xs[0], 0.0}, {xs[1], 0.0}});
        else if (xs.size() == 4) out.push_back({{xs[0], xs[2]}, {xs[1], xs[3]}});
        else throw ConfigError("'" + key + "': a box is x0:x1 or x0:x1:y0:y1");
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto num = [&](const char* key, double RunConfig::*field) {
            t[key] = [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = to_double(v, k); };
        };
        t["domain.kind"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "interval") c.kind = DomainKind::interval;
            else if (v == "rectangle") c.kind = DomainKind::rectangle;
            else if (v == "disk") c.kind = DomainKind::disk;
            else throw ConfigError("'" + k + "' must be interval, rectangle or disk");
        };
        num("domain.a", &RunConfig::a);
        num("domain.b", &RunConfig::b);
        num("domain.x0", &RunConfig::x0);
        num("domain.x1", &RunConfig::x1);
        num("domain.y0", &RunConfig::y0);
        num("domain.y1", &RunConfig::y1);
        num("domain.radius", &RunConfig::radius);
        t["domain.cx"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.center.x = to_double(v, k); };
        t["domain.cy"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.center.y = to_double(v, k); };
        t["domain.n"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.n = static_cast<int>(to_int(v, k)); };

        t["model.name"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v != "linear" && v != "weighted" && v != "arctan_tilt")
                throw ConfigError("'" + k + "' must be linear, weighted or arctan_tilt");
            c.model_name = v;
        };
        num("model.epsilon", &RunConfig::epsilon);
        num("model.c", &RunConfig::c);
        t["model.a_expr"] = [](RunConfig& c, const std::string&, const std::string& v) { c.a_expr = v; };

        t["boundary.u0"] = [](RunConfig& c, const std::string&, const std::string& v) { c.u0_expr = v; };
        t["boundary.file"] = [](RunConfig& c, const std::string&, const std::string& v) { c.u0_file = v; };

        t["continuation.p_start"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.schedule.p_start = to_double(v, k); };
        t["continuation.p_max"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.schedule.p_max = to_double(v, k); };
        t["continuation.growth"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.schedule.growth = to_double(v, k); };
        t["continuation.stop_rel_e"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.schedule.stop_rel_e = to_double(v, k); };
        t["continuation.drift_r"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.schedule.drift_r = to_double(v, k); };

        t["solver.tol_grad"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.tol_grad = to_double(v, k); };
        t["solver.max_iter"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.max_iter = static_cast<int>(to_int(v, k)); };
        t["solver.damping"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.damping = to_double(v, k); };

        num("analysis.tau", &RunConfig::tau);
        t["analysis.probe_count"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.probe_count = static_cast<int>(to_int(v, k)); };
        t["analysis.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const long s = to_int(v, k);
            if (s < 0) throw ConfigError("'" + k + "' must be nonnegative");
            c.seed = static_cast<std::uint64_t>(s);
        };
        num("analysis.probe_p", &RunConfig::probe_p);
        num("analysis.probe_tol_abs", &RunConfig::probe_tol_abs);
        num("analysis.probe_tol_rel", &RunConfig::probe_tol_rel);
        t["analysis.probe_boxes"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.probe_boxes = to_boxes(v, k); };
        t["analysis.fit_degree"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.fit_degree = static_cast<int>(to_int(v, k)); };
        num("analysis.interior_r", &RunConfig::interior_r);
        num("analysis.pairing_epsilon", &RunConfig::pairing_epsilon);

        num("smooth.epsilon", &RunConfig::smooth_epsilon);

        t["output.dir"] = [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; };
        t["output.snapshots"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.snapshots = to_bool(v, k); };
        return t;
    }();
    return table;
}

}  // namespace

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin)
{
    RunConfig cfg;
    cfg.source = origin;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(origin, line, "expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) fail(origin, line, "unknown key '" + key + "'");
        if (seen.count(key)) fail(origin, line, "duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
        if (value.empty()) fail(origin, line, "empty value for '" + key + "'");
        seen[key] = line;
        try {
            it->second(cfg, key, value);
        } catch (const ConfigError& e) {
            fail(origin, line, e.what());
        }
        cfg.entries.emplace_back(key, value);
    }
    if (!seen.count("domain.kind")) fail(origin, 0, "missing required key 'domain.kind'");
    if (!seen.count("domain.n")) fail(origin, 0, "missing required key 'domain.n'");
    if (!seen.count("model.name")) fail(origin, 0, "missing required key 'model.name'");
    if (cfg.u0_expr.empty() == cfg.u0_file.empty())
        fail(origin, 0, "exactly one of 'boundary.u0' and 'boundary.file' is required");
    if (cfg.n < 24) fail(origin, seen["domain.n"], "domain.n must be at least 24");
    if (cfg.model_name == "weighted" && cfg.a_expr.empty()) fail(origin, 0, "the weighted model needs 'model.a_expr'");
    if (!cfg.u0_file.empty() && !std::filesystem::exists(cfg.u0_file))
        fail(origin, seen["boundary.file"], "boundary file '" + cfg.u0_file + "' does not exist");
    // validate expressions early so that errors point at the config
    try {
        if (!cfg.u0_expr.empty()) Expression{cfg.u0_expr};
        if (!cfg.a_expr.empty()) Expression{cfg.a_expr};
    } catch (const ConfigError& e) {
        fail(origin, 0, e.what());
    }
    return cfg;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_config_text(ss.str(), path);
    // relative data paths are taken relative to the config file
    if (!cfg.u0_file.empty()) {
        std::filesystem::path p(cfg.u0_file);
        if (p.is_relative()) cfg.u0_file = (std::filesystem::path(path).parent_path() / p).string();
    }
    return cfg;
}

DomainPtr RunConfig::make_domain() const
{
    switch (kind) {
    case DomainKind::interval: return GridDomain::interval(a, b, n);
    case DomainKind::rectangle: return GridDomain::rectangle(x0, x1, y0, y1, n);
    case DomainKind::disk: return GridDomain::disk(center, radius, n);
    }
    throw ConfigError("unknown domain kind");
}

FModel RunConfig::make_model() const
{
    if (model_name == "linear") return make_linear();
    if (model_name == "arctan_tilt") return make_arctan_tilt(epsilon);
    if (model_name == "weighted") {
        const Expression e(a_expr);
        return make_weighted([e](Point x) { return e(x.x, x.y); }, c, a_expr);
    }
    throw ConfigError("unknown model '" + model_name + "'");
}

Field RunConfig::make_u0(const DomainPtr& domain) const
{
    if (!u0_file.empty()) return read_field(u0_file, domain);
    const Expression e(u0_expr);
    Field u = Field::sample(domain, [&e](Point x) { return e(x.x, x.y); });
    for (std::size_t k = 0; k < u.size(); ++k)
        if (!std::isfinite(u.values[k])) throw ConfigError("boundary.u0 is not finite at some grid node");
    return u;
}

ProbeConfig RunConfig::probe_config() const
{
    ProbeConfig p;
    p.count = probe_count;
    p.seed = seed;
    p.p = probe_p;
    p.tol_abs = probe_tol_abs;
    p.tol_rel = probe_tol_rel;
    p.boxes = probe_boxes;
    p.solver = solver;
    return p;
}

StructureOptions RunConfig::structure_options() const
{
    StructureOptions o;
    o.tau = tau;
    o.fit_degree = fit_degree;
    o.interior_r = interior_r;
    o.pairing_epsilon = pairing_epsilon;
    if (probe_count > 0 || !probe_boxes.empty()) o.probe = probe_config();
    return o;
}

}  // namespace linf
