#include "linf/field_io.hpp"

#include "linf/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace linf {

namespace {

static_assert(std::endian::native == std::endian::little, "binary field format assumes a little-endian host");

const char* kind_name(DomainKind k)
{
    switch (k) {
    case DomainKind::interval: return "interval";
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::disk: return "disk";
    }
    return "?";
}

nlohmann::json header(const GridDomain& g)
{
    nlohmann::json h;
    h["kind"] = kind_name(g.kind());
    h["dim"] = g.dim();
    h["nx"] = g.nx();
    h["ny"] = g.ny();
    h["h"] = g.h();
    h["lower"] = {g.lower().x, g.lower().y};
    h["upper"] = {g.upper().x, g.upper().y};
    if (g.kind() == DomainKind::disk) {
        h["center"] = {g.center().x, g.center().y};
        h["radius"] = g.radius();
    }
    h["dtype"] = "float64-le";
    return h;
}

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * std::max(1.0, scale); }

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out)
{
    std::ofstream out(path, mode);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << std::setprecision(17);
    return out;
}

}  // namespace

void write_field_csv(const Field& f, const std::string& path)
{
    const GridDomain& g = *f.domain;
    auto out = open_out(path);
    out << (g.dim() == 1 ? "x,value\n" : "i,j,x,y,value\n");
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.in_domain(k)) continue;
        const Point p = g.point(k);
        if (g.dim() == 1) out << p.x << ',' << f.values[k] << '\n';
        else out << g.ix(k) << ',' << g.iy(k) << ',' << p.x << ',' << p.y << ',' << f.values[k] << '\n';
    }
}

void write_field_bin(const Field& f, const std::string& path)
{
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out << header(*f.domain).dump() << '\n';
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!out) throw Error("short write to '" + path + "'");
}

Field read_field_bin(const std::string& path, DomainPtr domain)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open field file '" + path + "'");
    std::string line;
    std::getline(in, line);
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("field file '" + path + "': bad header: " + e.what());
    }
    const GridDomain& g = *domain;
    const double ext = g.diameter();
    bool ok = h.value("kind", std::string{}) == kind_name(g.kind()) && h.value("nx", -1) == g.nx() &&
              h.value("ny", -1) == g.ny() && close(h.value("h", 0.0), g.h(), g.h());
    if (ok) {
        const auto lo = h.at("lower");
        ok = close(lo.at(0).get<double>(), g.lower().x, ext) && close(lo.at(1).get<double>(), g.lower().y, ext);
    }
    if (!ok) throw ConfigError("field file '" + path + "' was written for a different grid");
    Field f(domain);
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(f.values.size() * sizeof(double)))
        throw ConfigError("field file '" + path + "' is truncated");
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.in_domain(k)) f.values[k] = 0.0;
        else if (!std::isfinite(f.values[k])) throw ConfigError("field file '" + path + "' has non-finite values");
    }
    return f;
}

Field read_field_csv(const std::string& path, DomainPtr domain)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open field file '" + path + "'");
    const GridDomain& g = *domain;
    Field f(domain);
    std::vector<bool> seen(g.size(), false);
    std::string line;
    std::getline(in, line);
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x = 0.0;
        double y = 0.0;
        double v = 0.0;
        if (g.dim() == 1) {
            ss >> x >> v;
        } else {
            double i = 0.0;
            double j = 0.0;
            ss >> i >> j >> x >> y >> v;
        }
        if (!ss) throw ConfigError("field file '" + path + "': malformed row " + std::to_string(row));
        const long i = std::lround((x - g.lower().x) / g.h());
        const long j = g.dim() == 1 ? 0 : std::lround((y - g.lower().y) / g.h());
        if (i < 0 || i >= g.nx() || j < 0 || j >= g.ny())
            throw ConfigError("field file '" + path + "': row " + std::to_string(row) + " is off the grid");
        const std::size_t k = g.index(static_cast<int>(i), static_cast<int>(j));
        const Point p = g.point(k);
        if (std::abs(p.x - x) > 1e-6 * g.h() || std::abs(p.y - y) > 1e-6 * g.h())
            throw ConfigError("field file '" + path + "': row " + std::to_string(row) + " is not at a node");
        f.values[k] = v;
        seen[k] = true;
    }
    for (std::size_t k = 0; k < g.size(); ++k)
        if (g.in_domain(k) && !seen[k]) throw ConfigError("field file '" + path + "' does not cover the grid");
    return f;
}

Field read_field(const std::string& path, DomainPtr domain)
{
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0) return read_field_bin(path, std::move(domain));
    return read_field_csv(path, std::move(domain));
}

}  // namespace linf
