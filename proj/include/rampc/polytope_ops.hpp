#pragma once

#include "rampc/polytope.hpp"

#include <vector>

namespace rampc {

/// Vertex enumeration by hyperplane-combination search, dim <= 3.
/// Throws Unsupported for dim > 3 and UnboundedPolytope for unbounded input.
/// An empty polytope yields an empty list.
std::vector<Vec> vertices(const Polytope& P, double tol = 1e-9);

/// Drops rows implied by the remaining ones (one LP per row). Rows are
/// normalised to unit norm. An empty input becomes Polytope::empty.
Polytope remove_redundant(const Polytope& P, double tol = 1e-9);

bool is_empty(const Polytope& P, double tol = 1e-9);

/// max c^T x over P; throws UnboundedPolytope when unbounded and
/// EstimationInconsistent when P is empty.
double support(const Polytope& P, const Vec& c);

/// Per-coordinate extents [lo_i, hi_i] of P.
std::pair<Vec, Vec> bounding_box(const Polytope& P);

/// True if every vertex of inner lies in outer (both bounded).
bool contained_in(const Polytope& inner, const Polytope& outer, double tol = 1e-9);

} // namespace rampc
