#include "linf/grid.hpp"

#include "linf/error.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>

namespace linf {

std::shared_ptr<const GridDomain> GridDomain::interval(double a, double b, int n)
{
    if (!(b > a)) throw ConfigError("interval: need b > a");
    if (n < 6) throw ConfigError("interval: need at least 6 nodes");
    std::shared_ptr<GridDomain> d(new GridDomain());
    d->dim_ = 1;
    d->kind_ = DomainKind::interval;
    d->nx_ = n;
    d->ny_ = 1;
    d->h_ = (b - a) / (n - 1);
    d->lower_ = {a, 0.0};
    d->upper_ = {b, 0.0};
    d->center_ = {0.5 * (a + b), 0.0};
    d->classify([](Point) { return true; });
    return d;
}

std::shared_ptr<const GridDomain> GridDomain::rectangle(double x0, double x1, double y0, double y1, int nx)
{
    if (!(x1 > x0 && y1 > y0)) throw ConfigError("rectangle: empty bounds");
    if (nx < 6) throw ConfigError("rectangle: need at least 6 nodes per axis");
    const double h = (x1 - x0) / (nx - 1);
    const double cells_y = (y1 - y0) / h;
    const long ny_cells = std::lround(cells_y);
    if (std::abs(cells_y - static_cast<double>(ny_cells)) > 1e-9 * std::max(1.0, cells_y) || ny_cells < 5)
        throw ConfigError("rectangle: y extent is not a whole number of cells of width h");
    std::shared_ptr<GridDomain> d(new GridDomain());
    d->dim_ = 2;
    d->kind_ = DomainKind::rectangle;
    d->nx_ = nx;
    d->ny_ = static_cast<int>(ny_cells) + 1;
    d->h_ = h;
    d->lower_ = {x0, y0};
    d->upper_ = {x1, y1};
    d->center_ = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
    d->classify([](Point) { return true; });
    return d;
}

std::shared_ptr<const GridDomain> GridDomain::disk(Point center, double radius, int n)
{
    if (!(radius > 0.0)) throw ConfigError("disk: radius must be positive");
    if (n < 9) throw ConfigError("disk: need at least 9 nodes per axis");
    std::shared_ptr<GridDomain> d(new GridDomain());
    d->dim_ = 2;
    d->kind_ = DomainKind::disk;
    d->nx_ = n;
    d->ny_ = n;
    d->h_ = 2.0 * radius / (n - 1);
    d->lower_ = {center.x - radius, center.y - radius};
    d->upper_ = {center.x + radius, center.y + radius};
    d->center_ = center;
    d->radius_ = radius;
    d->classify([center, radius](Point p) {
        return std::hypot(p.x - center.x, p.y - center.y) <= radius * (1.0 + 1e-12);
    });
    return d;
}

double GridDomain::inradius() const
{
    switch (kind_) {
    case DomainKind::interval: return 0.5 * (upper_.x - lower_.x);
    case DomainKind::rectangle: return 0.5 * std::min(upper_.x - lower_.x, upper_.y - lower_.y);
    case DomainKind::disk: return radius_;
    }
    return 0.0;
}

double GridDomain::diameter() const
{
    switch (kind_) {
    case DomainKind::interval: return upper_.x - lower_.x;
    case DomainKind::rectangle: return std::hypot(upper_.x - lower_.x, upper_.y - lower_.y);
    case DomainKind::disk: return 2.0 * radius_;
    }
    return 0.0;
}

std::array<std::ptrdiff_t, 4> GridDomain::neighbours(std::size_t k) const
{
    std::array<std::ptrdiff_t, 4> nb{-1, -1, -1, -1};
    const int i = ix(k);
    const int j = iy(k);
    if (i > 0) nb[0] = static_cast<std::ptrdiff_t>(index(i - 1, j));
    if (i + 1 < nx_) nb[1] = static_cast<std::ptrdiff_t>(index(i + 1, j));
    if (dim_ == 2) {
        if (j > 0) nb[2] = static_cast<std::ptrdiff_t>(index(i, j - 1));
        if (j + 1 < ny_) nb[3] = static_cast<std::ptrdiff_t>(index(i, j + 1));
    }
    return nb;
}

double GridDomain::distance_at(std::size_t k) const
{
    const Point p = point(k);
    switch (kind_) {
    case DomainKind::interval: return std::min(p.x - lower_.x, upper_.x - p.x);
    case DomainKind::rectangle:
        return std::min({p.x - lower_.x, upper_.x - p.x, p.y - lower_.y, upper_.y - p.y});
    case DomainKind::disk: return radius_ - std::hypot(p.x - center_.x, p.y - center_.y);
    }
    return 0.0;
}

void GridDomain::classify(const std::function<bool(Point)>& inside)
{
    const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
    std::vector<bool> dom(n);
    for (std::size_t k = 0; k < n; ++k) dom[k] = inside(point(k));

    const int nb_count = neighbour_count();
    auto all_nbrs = [&](std::size_t k, auto pred) {
        const auto nb = neighbours(k);
        for (int q = 0; q < nb_count; ++q)
            if (nb[q] < 0 || !pred(static_cast<std::size_t>(nb[q]))) return false;
        return true;
    };

    // ring 0: in the domain with an axis neighbour outside; ring 1: touches ring 0
    std::vector<int> ring(n, -1);
    for (std::size_t k = 0; k < n; ++k)
        if (dom[k] && !all_nbrs(k, [&](std::size_t q) { return static_cast<bool>(dom[q]); })) ring[k] = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (dom[k] && ring[k] != 0 && !all_nbrs(k, [&](std::size_t q) { return ring[q] != 0; })) ring[k] = 1;

    tags_.assign(n, NodeTag::masked);
    stencil_.assign(n, false);
    eval_.assign(n, false);
    free_list_.clear();
    eval_list_.clear();
    for (std::size_t k = 0; k < n; ++k) {
        if (!dom[k]) continue;
        tags_[k] = ring[k] >= 0 ? NodeTag::clamped : NodeTag::free;
        if (tags_[k] == NodeTag::free) free_list_.push_back(k);
        stencil_[k] = ring[k] != 0;
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!stencil_[k]) continue;
        bool touches = tags_[k] == NodeTag::free;
        const auto nb = neighbours(k);
        for (int q = 0; q < nb_count; ++q) touches = touches || tags_[static_cast<std::size_t>(nb[q])] == NodeTag::free;
        if (touches) {
            eval_[k] = true;
            eval_list_.push_back(k);
        }
    }
    if (free_list_.empty()) throw ConfigError("grid has no free nodes; increase the resolution");
}

Field Field::sample(DomainPtr d, const std::function<double(Point)>& fn)
{
    Field f(d);
    for (std::size_t k = 0; k < d->size(); ++k)
        if (d->in_domain(k)) f.values[k] = fn(d->point(k));
    return f;
}

double laplacian_at(const Field& u, std::size_t k)
{
    const GridDomain& g = *u.domain;
    const auto nb = g.neighbours(k);
    double s = -static_cast<double>(g.neighbour_count()) * u.values[k];
    for (int q = 0; q < g.neighbour_count(); ++q) s += u.values[static_cast<std::size_t>(nb[q])];
    return s / (g.h() * g.h());
}

Field laplacian(const Field& u)
{
    const GridDomain& g = *u.domain;
    Field out(u.domain);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (g.has_stencil(k)) out.values[k] = laplacian_at(u, k);
    return out;
}

VectorField gradient(const Field& g, const Mask* support)
{
    const GridDomain& d = *g.domain;
    VectorField out{Field(g.domain), Field(g.domain)};
    auto ok = [&](std::ptrdiff_t q) {
        if (q < 0) return false;
        const auto uq = static_cast<std::size_t>(q);
        return support ? static_cast<bool>((*support)[uq]) : d.in_domain(uq);
    };
    const double inv = 1.0 / (2.0 * d.h());
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (!(support ? static_cast<bool>((*support)[k]) : d.in_domain(k))) continue;
        const auto nb = d.neighbours(k);
        bool full = true;
        for (int q = 0; q < d.neighbour_count(); ++q) full = full && ok(nb[q]);
        if (!full) continue;
        out.x.values[k] = (g.values[static_cast<std::size_t>(nb[1])] - g.values[static_cast<std::size_t>(nb[0])]) * inv;
        if (d.dim() == 2)
            out.y.values[k] = (g.values[static_cast<std::size_t>(nb[3])] - g.values[static_cast<std::size_t>(nb[2])]) * inv;
    }
    return out;
}

std::vector<Field> harmonic_basis(DomainPtr domain, int degree)
{
    if (degree < 0) throw ConfigError("harmonic_basis: degree must be >= 0");
    std::vector<std::function<double(Point)>> fns;
    fns.emplace_back([](Point) { return 1.0; });
    if (domain->dim() == 1) {
        if (degree >= 1) fns.emplace_back([](Point p) { return p.x; });
    } else {
        if (degree > 3) throw ConfigError("harmonic_basis: 2D table implemented up to degree 3");
        if (degree >= 1) {
            fns.emplace_back([](Point p) { return p.x; });
            fns.emplace_back([](Point p) { return p.y; });
        }
        if (degree >= 2) {
            fns.emplace_back([](Point p) { return p.x * p.y; });
            fns.emplace_back([](Point p) { return p.x * p.x - p.y * p.y; });
        }
        if (degree >= 3) {
            fns.emplace_back([](Point p) { return p.x * p.x * p.x - 3.0 * p.x * p.y * p.y; });
            fns.emplace_back([](Point p) { return 3.0 * p.x * p.x * p.y - p.y * p.y * p.y; });
        }
    }
    std::vector<Field> out;
    out.reserve(fns.size());
    for (const auto& fn : fns) out.push_back(Field::sample(domain, fn));
    return out;
}

Field distance(DomainPtr domain)
{
    Field d(domain);
    for (std::size_t k = 0; k < domain->size(); ++k)
        if (domain->in_domain(k)) d.values[k] = domain->distance_at(k);
    return d;
}

Mask inner_zone(const GridDomain& domain, double r)
{
    Mask m(domain.size(), false);
    for (std::size_t k = 0; k < domain.size(); ++k)
        m[k] = domain.in_domain(k) && domain.distance_at(k) < r;
    return m;
}

Field poisson_dirichlet(const Field& boundary, const Mask& region)
{
    const GridDomain& g = *boundary.domain;
    std::vector<std::ptrdiff_t> slot(g.size(), -1);
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!region[k]) continue;
        if (!g.has_stencil(k)) throw ConfigError("poisson_dirichlet: region node without a full stencil");
        slot[k] = static_cast<std::ptrdiff_t>(nodes.size());
        nodes.push_back(k);
    }
    Field out = boundary;
    if (nodes.empty()) return out;

    const int nbc = g.neighbour_count();
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t r = 0; r < nodes.size(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        trip.emplace_back(row, row, static_cast<double>(nbc));
        const auto nb = g.neighbours(nodes[r]);
        for (int q = 0; q < nbc; ++q) {
            const auto k = static_cast<std::size_t>(nb[q]);
            if (slot[k] >= 0) trip.emplace_back(row, slot[k], -1.0);
            else rhs[row] += boundary.values[k];
        }
    }
    Eigen::SparseMatrix<double> A(rhs.size(), rhs.size());
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) throw SolverError("poisson_dirichlet: singular system");
    const Eigen::VectorXd x = solver.solve(rhs);
    for (std::size_t r = 0; r < nodes.size(); ++r) out.values[nodes[r]] = x[static_cast<Eigen::Index>(r)];
    return out;
}

Mask free_mask(const GridDomain& domain)
{
    Mask m(domain.size(), false);
    for (const std::size_t k : domain.free_nodes()) m[k] = true;
    return m;
}

Mask eval_mask(const GridDomain& domain)
{
    Mask m(domain.size(), false);
    for (const std::size_t k : domain.eval_nodes()) m[k] = true;
    return m;
}

}  // namespace linf
