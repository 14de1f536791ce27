#pragma once

#include "rampc/types.hpp"

#include <functional>

namespace rampc {

/// f(x) with gradient written to g.
using SmoothObjective = std::function<double(const Vec& x, Vec& g)>;

struct BfgsOptions {
    /// Stop when ||g||_inf <= grad_tol * max(1, |f|); the gradient of a large f
    /// cannot be resolved below that.
    double grad_tol = 1e-8;
    int max_iter = 200;
    /// Accepted gradient when the line search finds no strict decrease.
    double stall_tol = 1e-6;
    /// Initial inverse Hessian; a scaled identity when empty.
    Mat inv_hessian0;
};

struct BfgsResult {
    Vec x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Unconstrained BFGS with a backtracking Armijo line search.
BfgsResult bfgs_minimize(const SmoothObjective& fn, const Vec& x0, const BfgsOptions& opts = {});

} // namespace rampc
