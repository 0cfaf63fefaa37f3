#pragma once

#include "linf/fmodel.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace linf {

enum class DomainKind { interval, rectangle, disk };

/// Node classification. The clamped layer is two nodes deep: the outer ring
/// (nodes with a neighbour outside the domain) and the ring just inside it.
enum class NodeTag : std::uint8_t { masked, clamped, free };

using Mask = std::vector<bool>;

/// Uniform Cartesian grid over an interval, a rectangle, or a disk (masked
/// box). Immutable after construction and shared between fields.
///
/// Three node sets matter to the solvers:
///   - free nodes: the unknowns; everything else is pinned to boundary data;
///   - stencil nodes: the full 3-point (1D) / 5-point (2D) Laplacian stencil
///     lies in the domain;
///   - evaluation nodes: stencil nodes whose stencil touches a free node.
///     Energies and averages are taken over these. Stencil nodes whose
///     Laplacian is completely fixed by the clamped data (rectangle corners)
///     are excluded.
class GridDomain {
public:
    static std::shared_ptr<const GridDomain> interval(double a, double b, int n);
    /// `nx` nodes along x; the y extent must be a whole number of cells.
    static std::shared_ptr<const GridDomain> rectangle(double x0, double x1, double y0, double y1, int nx);
    /// `n` nodes per axis across the bounding box of the disk.
    static std::shared_ptr<const GridDomain> disk(Point center, double radius, int n);

    int dim() const { return dim_; }
    DomainKind kind() const { return kind_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return tags_.size(); }
    double h() const { return h_; }
    double cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }

    /// Bounding box; for the disk, the square around it.
    Point lower() const { return lower_; }
    Point upper() const { return upper_; }
    Point center() const { return center_; }
    double radius() const { return radius_; }
    double inradius() const;
    double diameter() const;

    std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(j) * nx_ + i; }
    int ix(std::size_t k) const { return static_cast<int>(k % nx_); }
    int iy(std::size_t k) const { return static_cast<int>(k / nx_); }
    Point point(std::size_t k) const { return {lower_.x + h_ * ix(k), lower_.y + h_ * iy(k)}; }

    NodeTag tag(std::size_t k) const { return tags_[k]; }
    bool in_domain(std::size_t k) const { return tags_[k] != NodeTag::masked; }
    bool is_free(std::size_t k) const { return tags_[k] == NodeTag::free; }
    bool is_clamped(std::size_t k) const { return tags_[k] == NodeTag::clamped; }
    bool has_stencil(std::size_t k) const { return stencil_[k]; }
    bool is_eval(std::size_t k) const { return eval_[k]; }

    std::span<const std::size_t> free_nodes() const { return free_list_; }
    std::span<const std::size_t> eval_nodes() const { return eval_list_; }

    /// Discrete measure of the evaluation set, |E| h^dim.
    double measure() const { return static_cast<double>(eval_list_.size()) * cell_volume(); }

    /// Axis neighbours (2 in 1D, 4 in 2D); -1 where the neighbour is off the box.
    std::array<std::ptrdiff_t, 4> neighbours(std::size_t k) const;
    int neighbour_count() const { return 2 * dim_; }

    /// Analytic distance from node k to the boundary of the continuous domain.
    double distance_at(std::size_t k) const;

private:
    GridDomain() = default;
    void classify(const std::function<bool(Point)>& inside);

    int dim_ = 1;
    DomainKind kind_ = DomainKind::interval;
    int nx_ = 0;
    int ny_ = 1;
    double h_ = 0.0;
    Point lower_{};
    Point upper_{};
    Point center_{};
    double radius_ = 0.0;
    std::vector<NodeTag> tags_;
    std::vector<bool> stencil_;
    std::vector<bool> eval_;
    std::vector<std::size_t> free_list_;
    std::vector<std::size_t> eval_list_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

/// Nodal scalar field. Masked nodes hold 0.
struct Field {
    DomainPtr domain;
    std::vector<double> values;

    Field() = default;
    explicit Field(DomainPtr d, double fill = 0.0) : domain(std::move(d)), values(domain->size(), fill) {}

    static Field sample(DomainPtr d, const std::function<double(Point)>& fn);

    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }
    std::size_t size() const { return values.size(); }
};

struct VectorField {
    Field x;
    Field y;
};

/// Centered 3-point / 5-point Laplacian at stencil nodes; 0 elsewhere.
Field laplacian(const Field& u);

/// Laplacian at a single node (caller guarantees the stencil is available).
double laplacian_at(const Field& u, std::size_t k);

/// Centered differences at nodes whose axis neighbours all lie in `support`
/// (defaults to the domain); 0 elsewhere.
VectorField gradient(const Field& g, const Mask* support = nullptr);

/// Harmonic polynomials sampled at the nodes: 1D {1, x}; 2D {1, x, y, xy,
/// x^2-y^2, x^3-3xy^2, 3x^2y-y^3} truncated at `degree` (at most 3).
std::vector<Field> harmonic_basis(DomainPtr domain, int degree);

/// Exact distance to the boundary at every in-domain node.
Field distance(DomainPtr domain);

/// Nodes of the inner zone {d < r} (in-domain nodes only).
Mask inner_zone(const GridDomain& domain, double r);

/// Discrete harmonic extension: solves Delta_h u = 0 at the nodes of `region`
/// using the values of `boundary` at every other node touched by the stencil.
/// Region nodes must have a full stencil.
Field poisson_dirichlet(const Field& boundary, const Mask& region);

Mask free_mask(const GridDomain& domain);
Mask eval_mask(const GridDomain& domain);

}  // namespace linf
