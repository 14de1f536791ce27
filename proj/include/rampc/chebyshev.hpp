#pragma once

#include "rampc/types.hpp"

namespace rampc {

/// Chebyshev-Gauss-Lobatto nodes s_i = (1 - cos(pi i / D)) / 2 on [0, 1].
Vec cgl_nodes(int degree);

/// Clenshaw-Curtis rule with num_points nodes mapped to [0, 1].
void clenshaw_curtis(int num_points, Vec& s, Vec& w);

/// Degree-D interpolant through the CGL nodes, tabulated at a quadrature rule.
struct ChebyshevBasis {
    int degree = 0;
    Vec nodes;  // D + 1
    Vec quad_s; // Q
    Vec quad_w; // Q
    Mat Phi;    // Q x (D+1): Lagrange basis values at quad_s
    Mat dPhi;   // Q x (D+1): d/ds of the same

    /// Default quadrature uses 2D + 3 points.
    explicit ChebyshevBasis(int degree, int quad_points = -1);

    /// Lagrange basis values and derivatives at arbitrary s.
    void eval(double s, Vec& phi, Vec& dphi) const;

private:
    Mat coeff_; // (D+1) x (D+1): Chebyshev coefficients of each Lagrange polynomial
};

} // namespace rampc
