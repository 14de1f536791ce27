#pragma once

#include "rampc/system.hpp"

#include <functional>

namespace rampc {

/// Steady state (z_ref, v_ref) for a nominal parameter and its derivatives in theta_bar.
struct ReferencePoint {
    Vec z;
    Vec v;
    Mat dz; // n x p
    Mat dv; // m x p
};

using ReferenceFn = std::function<ReferencePoint(const Vec& theta_bar)>;

/// Hover: z_ref = 0, v_ref = g / (2 theta_bar) [1, 1].
ReferenceFn quadrotor_reference(double g = 9.81);

/// Output-tracking steady state: min ||C z + Dv v - y_d||^2  s.t.  f_bar(z, v, theta) = 0,
/// (z, v) in the constraint set; solved with the SQP solver. Derivatives by central
/// differences of warm-started re-solves. Throws ReferenceError when infeasible.
ReferenceFn steady_state_reference(const UncertainSystem& sys, const Mat& C, const Mat& Dv, const Vec& y_d,
                                   const Vec& z_guess, const Vec& v_guess);

ReferencePoint reference_point(const ReferenceFn& ref, const Vec& theta_bar);

} // namespace rampc
