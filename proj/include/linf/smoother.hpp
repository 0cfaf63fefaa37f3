#pragma once

#include "linf/grid.hpp"

#include <vector>

namespace linf {

struct MollifyOptions {
    /// Divide by the kernel mass that falls on `support` instead of
    /// extending g by zero.
    bool renormalize = false;
    /// Nodes where g is defined; defaults to the in-domain nodes.
    const Mask* support = nullptr;
    /// Nodes at which the result is wanted; defaults to the in-domain nodes.
    const Mask* where = nullptr;
};

/// Discrete convolution with the bump exp(-1/(1 - t^2)), t = |x|/delta,
/// normalised to unit mass on the lattice. Throws ConfigError if delta < 2h.
Field mollify(const Field& g, double delta, const MollifyOptions& options = {});

/// t for t <= 1/2, then a cubic reaching 0 with zero slope at t = 1; 0 beyond.
double distance_cap(double t);

struct SmootherStep {
    double r = 0.0;
    double delta = 0.0;
    double measured_sup = 0.0;
};

struct SmootherResult {
    Field w;
    double epsilon = 0.0;
    double r = 0.0;
    double r0 = 0.0;
    double delta = 0.0;
    double measured_sup = 0.0;
    bool success = false;
    std::vector<SmootherStep> history;
};

struct SmootherOptions {
    /// Cap radius of the distance; 0 selects a quarter of the inradius.
    double r0 = 0.0;
    /// Zero-extend Delta_h u0 instead of renormalising the kernel near the boundary.
    bool zero_extension = false;
};

/// w = u0 - phi * (eta_delta * Delta_h u0) with phi = dc (dc - h) / 2,
/// dc = r0 cap(d / r0), and phi = 0 on the clamped layer. Halves r from r0,
/// with delta = L (r / L)^(1/4) and L the diameter, until
/// max |Delta_h w| over evaluation nodes with d < r is at most epsilon or r < 4h.
/// On failure the result holds the step with the smallest measured sup.
SmootherResult build_w(const Field& u0, double epsilon, const SmootherOptions& options = {});

}  // namespace linf
