#pragma once

#include "rampc/system.hpp"

namespace rampc {

struct QuadrotorParams {
    double g = 9.81;
    /// True mass; the uncertain parameter is theta = 1/m.
    double m = 1.0 / (1.01 * 2.058);
    double l = 0.25;
    double J = 0.00383;
    double theta_bar0 = 2.058;
    /// Theta0 = [1 - w, 1 + w] * theta_bar0.
    double theta_rel_width = 0.01;
    double d_max = 0.1;
    double eps_max = 0.1;
    /// Position range of the sampling box (positions are otherwise unconstrained).
    double p_range = 5.0;

    double theta_true() const { return 1.0 / m; }
    void validate() const;
};

/// Planar quadrotor, state (p1, p2, phi, v1, v2, phidot), input (u1, u2).
/// B carries only the moment row (l/J)(u1 - u2); the thrust enters through
/// G(x,u) theta = theta * (u1 + u2) e_5 so hover is an equilibrium for every theta.
UncertainSystem quadrotor_model(const QuadrotorParams& params = {});

} // namespace rampc
