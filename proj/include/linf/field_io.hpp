#pragma once

#include "linf/grid.hpp"

#include <string>

namespace linf {

/// CSV with a header row. 1D: `x,value`; 2D: `i,j,x,y,value`. Masked nodes
/// are skipped.
void write_field_csv(const Field& f, const std::string& path);

/// One JSON header line ({"kind","nx","ny","h","lower","upper",...}) followed
/// by nx*ny little-endian doubles in node order.
void write_field_bin(const Field& f, const std::string& path);

/// Reads a binary field written by write_field_bin. The header must describe
/// the same grid as `domain` (kind, node counts, spacing and bounds).
Field read_field_bin(const std::string& path, DomainPtr domain);

/// Reads a CSV field written by write_field_csv onto `domain`. Nodes are
/// matched by position; every in-domain node must be present.
Field read_field_csv(const std::string& path, DomainPtr domain);

/// Reads either format, chosen by the file extension (.bin or .csv).
Field read_field(const std::string& path, DomainPtr domain);

}  // namespace linf
