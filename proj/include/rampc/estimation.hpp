#pragma once

#include "rampc/polytope.hpp"
#include "rampc/system.hpp"

#include <string>
#include <vector>

namespace rampc {

struct Measurement {
    double t = 0.0;
    Vec x;
    Vec u;
    Vec xdot_tilde; // measured derivative, xdot + eps
};

/// Fourier-Motzkin elimination of the trailing `count` coordinates of {y : A y <= b}.
Polytope eliminate_trailing(const Polytope& P, int count, double tol = 1e-12);

/// {theta : exists d in D, eps in D_eps with xdot_tilde = f + B u + G theta + E d + eps}.
/// Built as the projection of {(theta, d)} onto theta; may be unbounded.
Polytope nonfalsified_set(const UncertainSystem& sys, const Measurement& meas);

/// Theta_prev intersected with all deltas, redundancy removed, vertices cached.
/// Throws EstimationInconsistent on an empty result.
Polytope update_parameter_set(const Polytope& Theta_prev, const std::vector<Polytope>& deltas);

/// Support-function update of a fixed-direction polytope {H theta <= h}.
Vec fixed_complexity_update(const Mat& H, const Vec& h_prev, const std::vector<Polytope>& deltas);

/// Product of bounding-box edge lengths (interval width for p = 1).
double parameter_set_size(const Polytope& Theta);

void write_parameter_history(const std::string& path, const std::vector<double>& times,
                             const std::vector<Polytope>& history);

} // namespace rampc
