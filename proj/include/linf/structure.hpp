#pragma once

#include "linf/continuation.hpp"
#include "linf/fmodel.hpp"
#include "linf/grid.hpp"
#include "linf/lp_min.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace linf {

/// max |Delta_h f| h^2 over region nodes that carry a stencil.
double harmonic_residual(const Field& f, const Mask& region);

struct HarmonicFit {
    std::vector<double> coefficients;
    Field fit;
    /// ||f - fit|| / ||f|| in the discrete l2 norm over the region.
    double residual = 0.0;
};

/// Least-squares projection of f onto span(basis) over the region nodes.
/// Throws DegenerateError if the basis is rank deficient on the region.
HarmonicFit fit_harmonic(const Field& f, const std::vector<Field>& basis, const Mask& region);

/// Band of grid cells around the zero set of a field.
struct NodalSet {
    double tau = 0.0;
    /// Lower-left node (i, j) of each band cell; j = 0 in 1D.
    std::vector<std::array<int, 2>> cells;
    /// Corners of band cells.
    Mask nodes;
    double cell_fraction = 0.0;
    std::size_t region_cells = 0;
    /// 1D: interpolated zeros along the line. 2D: unused.
    std::vector<double> crossings;
    /// 2D: marching-squares segments of the zero level.
    std::vector<std::array<Point, 2>> segments;
};

/// Cells (all corners in `region`, default the evaluation nodes) where f
/// changes sign or some corner has |f| < tau ||f||_inf. Throws DegenerateError
/// if f vanishes on the region.
NodalSet nodal_set(const Field& f, double tau = 1e-2, const Mask* region = nullptr);

/// Band nodes grown by one node along each axis.
Mask dilate(const GridDomain& domain, const Mask& nodes);

struct RepresentationCheck {
    double sup = 0.0;
    std::size_t nodes = 0;
    /// |F(x, Delta_h u) - e sgn f| at the checked nodes, 0 elsewhere.
    Field residual;
    Mask checked;

    /// Share of checked nodes with residual <= rel * e.
    double fraction_within(double e, double rel) const;
};

/// sup of |F(x, Delta_h u) - e sgn f| over evaluation nodes outside the
/// one-node dilation of the band, skipping nodes with f = 0.
RepresentationCheck representation_residual(const Field& u, const FModel& model, double e, const Field& f,
                                            const NodalSet& band);

struct ELResidual {
    double sup = 0.0;
    double mean = 0.0;
    std::size_t nodes = 0;
    Field R;
};

/// R = F F_xi |grad_h |F|^2|^2 at evaluation nodes whose axis neighbours are
/// all evaluation nodes.
ELResidual el_residual(const Field& u, const FModel& model);

struct ProbeBox {
    Point lower;
    Point upper;
};

struct ProbeConfig {
    int count = 8;
    std::uint64_t seed = 1;
    double p = 128.0;
    double tol_abs = 1e-2;
    double tol_rel = 1e-2;
    int min_cells = 12;
    /// When non-empty these boxes are probed instead of random ones.
    std::vector<ProbeBox> boxes;
    SolverConfig solver;
};

struct ProbeOutcome {
    ProbeBox box;
    int cells_x = 0;
    int cells_y = 0;
    double e_restricted = 0.0;
    double e_sub = 0.0;
    double delta_e = 0.0;
    bool pass = true;
    std::string error;
};

struct ProbeReport {
    std::vector<ProbeOutcome> probes;
    double max_delta_e = 0.0;
    bool pass = true;
    double p = 0.0;
};

/// For each subdomain, clamps u's own values on the subgrid's double layer,
/// runs continuation up to config.p and compares with E_p of u restricted to
/// the subgrid. PASS iff every delta_e <= tol_abs + tol_rel * e_restricted.
ProbeReport minimality_probe(const Field& u, const FModel& model, const ProbeConfig& config);

struct DualBounds {
    double l1_mean = 0.0;
    double lpprime_mean = 0.0;
    double bound = 0.0;
};

/// mean |f| and (mean |f|^p')^(1/p') over evaluation nodes; both should stay below 1/c.
DualBounds dual_bounds(const Field& f, double p, const FModel& model);

/// Number of evaluation nodes where sgn f and sgn Delta_h u are both nonzero and differ.
std::size_t sign_mismatches(const Field& u, const Field& f);

struct Pairing {
    double value = 0.0;
    double bound = 0.0;
    double zone_part = 0.0;
    double smoother_r = 0.0;
    double smoother_sup = 0.0;
};

/// sum f Delta_h w h^dim against c^2 |Omega|_h e_p, w from build_w(u0, epsilon).
Pairing pairing_diagnostic(const LpProblem& problem, const Field& f, double e_p, double epsilon);

struct StructureOptions {
    double tau = 1e-2;
    int fit_degree = 3;
    /// Boundary zone excluded from the fit; 0 selects 5h.
    double interior_r = 0.0;
    /// Tolerance for the smoother used by the pairing diagnostic; 0 skips it,
    /// as do grids whose boundary zone is narrower than four cells.
    double pairing_epsilon = 0.1;
    std::optional<ProbeConfig> probe;
};

struct StructureReport {
    double e_inf = 0.0;
    double aitken = 0.0;
    double p = 0.0;
    double harmonic_residual_raw = 0.0;
    double harmonic_residual_fit = 0.0;
    HarmonicFit fit;
    double fit_sup = 0.0;
    bool fit_constant_sign = false;
    /// Band of the harmonic fit (the reported interface).
    std::optional<NodalSet> nodal;
    /// Sign-change cells of f_p itself; the representation check excludes these.
    std::optional<NodalSet> dual_nodal;
    RepresentationCheck representation;
    ELResidual el;
    DualBounds dual;
    std::size_t sign_mismatch = 0;
    std::optional<Pairing> pairing;
    std::optional<ProbeReport> probe;
};

/// Structure analysis of the last continuation step.
StructureReport analyze(const LpProblem& base, const ContinuationTrace& trace, const StructureOptions& options = {});

}  // namespace linf
