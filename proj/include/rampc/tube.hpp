#pragma once

#include "rampc/ccm.hpp"
#include "rampc/ccm_constants.hpp"
#include "rampc/polytope.hpp"
#include "rampc/sampling.hpp"
#include "rampc/system.hpp"

#include <string>
#include <vector>

namespace rampc {

struct TubeState {
    double t = 0.0;
    Vec z;
    double delta = 0.0;
};

struct TubeOptions {
    /// Use the constant bound M_upper instead of M(z) in the mismatch norm.
    bool conservative = false;
    int substeps = 4;
};

/// sum_k L_G,k |theta_i - theta_bar|_k * delta + ||G(z,v)(theta_i - theta_bar) + E(z) d_j||_M(z)
double w_bar_requirement(const TubeConstants& consts, const CCM& ccm, const UncertainSystem& sys, double delta,
                         const Vec& z, const Vec& v, const Vec& theta_i, const Vec& d_j, const Vec& theta_bar,
                         const TubeOptions& opts = {});

/// Maximum of w_bar_requirement over the vertex pairs of Theta x D.
double max_w_bar_requirement(const TubeConstants& consts, const CCM& ccm, const UncertainSystem& sys, double delta,
                             const Vec& z, const Vec& v, const Polytope& Theta, const Vec& theta_bar,
                             const TubeOptions& opts = {});

/// -(rho_c - L_D) delta + max over vertex pairs.
double f_delta(const TubeConstants& consts, const CCM& ccm, const UncertainSystem& sys, double delta, const Vec& z,
               const Vec& v, const Polytope& Theta, const Vec& theta_bar, const TubeOptions& opts = {});

/// h_j(z, v) + c_j delta.
Vec tightened_constraints(const UncertainSystem& sys, const TubeConstants& consts, const Vec& z, const Vec& v,
                          double delta);

struct TubeTrajectory {
    std::vector<TubeState> states; // N * substeps + 1 entries
    int clamped = 0;               // substeps where delta < 0 was clamped
};

/// Joint RK4 of (z', delta') = (f_bar, f_delta) with v piecewise constant over
/// intervals of length Ts (one row of v_profile per interval).
TubeTrajectory integrate_tube(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts, const Vec& z0,
                              double delta0, const Mat& v_profile, const Vec& theta_bar, const Polytope& Theta,
                              double Ts, const TubeOptions& opts = {});

/// Smallest constant delta with sampled max of f_delta(delta, .) <= 0.
double rigid_tube_scaling(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts,
                          const Polytope& Theta, const Vec& theta_bar, const std::vector<Sample>& samples,
                          const TubeOptions& opts = {});

void write_tube_csv(const std::string& path, const TubeTrajectory& tube, const std::vector<std::string>& names = {});

} // namespace rampc
