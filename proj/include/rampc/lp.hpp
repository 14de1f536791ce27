#pragma once

#include "rampc/types.hpp"

namespace rampc {

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPResult {
    LPStatus status = LPStatus::Infeasible;
    Vec x;
    double objective = 0.0;
};

/// Dense two-phase simplex (Bland's rule) for  max c^T x  s.t.  A x <= b,  x free.
/// Intended for the small parameter-space programs of the estimator.
LPResult lp_maximize(const Vec& c, const Mat& A, const Vec& b);

/// Feasibility of {A x <= b + tol}.
bool lp_feasible(const Mat& A, const Vec& b, double tol = 1e-9);

} // namespace rampc
