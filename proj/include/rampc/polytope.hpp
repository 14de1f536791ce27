#pragma once

#include "rampc/types.hpp"

#include <optional>
#include <vector>

namespace rampc {

/// H-representation {x : A x <= b} with an optional vertex cache.
struct Polytope {
    Mat A;
    Vec b;
    std::optional<std::vector<Vec>> vertices;

    Polytope() = default;
    Polytope(Mat A_, Vec b_);

    int dim() const { return static_cast<int>(A.cols()); }
    int num_rows() const { return static_cast<int>(A.rows()); }

    bool contains(const Vec& x, double tol = 1e-9) const;

    /// Axis-aligned box lo <= x <= hi.
    static Polytope box(const Vec& lo, const Vec& hi);
    static Polytope interval(double lo, double hi);
    /// Degenerate polytope {x}, encoded as x <= x, -x <= -x.
    static Polytope point(const Vec& x);
    /// The whole space R^dim (no rows).
    static Polytope whole_space(int dim);
    /// A canonical empty set: 0 <= -1.
    static Polytope empty(int dim);

    /// Cheap structural check for the canonical empty encoding (0 <= negative).
    bool trivially_empty(double tol = 1e-12) const;
};

/// Row-stacked intersection of H-representations (no redundancy removal).
Polytope intersect(const Polytope& a, const Polytope& b);

/// Vertices of P, enumerated when not cached (see polytope_ops).
std::vector<Vec> vertex_list(const Polytope& P);

/// Copy of P with its vertex cache filled.
Polytope with_vertices(Polytope P);

} // namespace rampc
