#pragma once

#include "rampc/ccm.hpp"
#include "rampc/chebyshev.hpp"

#include <stdexcept>

namespace rampc {

struct GeodesicOptions {
    int degree = 2;
    int quad_points = -1; // 2D + 3 when negative
    double grad_tol = 1e-8;
    int max_iter = 200;
};

struct GeodesicCurve {
    int degree = 0;
    Vec nodes;  // CGL nodes s_i
    Mat values; // n x (D+1), values(:, 0) = z, values(:, D) = x
    Mat derivs; // n x (D+1), gamma_s at the nodes
    double length = 0.0;     // V_delta = sqrt(energy)
    double energy = 0.0;     // discretised Riemannian energy
    double arc_length = 0.0; // quadrature of ||gamma_s||_M
    int iterations = 0;
    bool converged = false;
};

class GeodesicError : public std::runtime_error {
public:
    GeodesicError(const std::string& what, GeodesicCurve best) : std::runtime_error(what), best_(std::move(best)) {}
    const GeodesicCurve& best() const { return best_; }

private:
    GeodesicCurve best_;
};

/// Discretised energy of the curve through node values P (n x (D+1)); when
/// grad is non-null it receives dE/dP with the same shape.
double discrete_energy(const CCM& ccm, const ChebyshevBasis& basis, const Mat& P, Mat* grad = nullptr);

GeodesicCurve solve_geodesic(const CCM& ccm, const Vec& x, const Vec& z, const GeodesicOptions& opts = {});

/// Same, with a basis built once by the caller and an optional warm start for
/// the interior node values (n x (D-1)).
GeodesicCurve solve_geodesic(const CCM& ccm, const ChebyshevBasis& basis, const Vec& x, const Vec& z,
                             const GeodesicOptions& opts, const Mat* warm_interior = nullptr);

double v_delta(const CCM& ccm, const Vec& x, const Vec& z, const GeodesicOptions& opts = {});

/// kappa = v + int_0^1 K(gamma(s)) gamma_s(s) ds on the energy quadrature.
Vec feedback_kappa(const CCM& ccm, const Vec& x, const Vec& z, const Vec& v, const GeodesicOptions& opts = {});
Vec feedback_kappa(const CCM& ccm, const ChebyshevBasis& basis, const GeodesicCurve& curve, const Vec& v);

double riemann_energy(const GeodesicCurve& curve, const CCM& ccm, int quad_points = -1);

} // namespace rampc
