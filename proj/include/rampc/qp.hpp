#pragma once

#include "rampc/types.hpp"

namespace rampc {

enum class QPStatus { Optimal, Infeasible, MaxIterations, NotConvex };

struct QPResult {
    QPStatus status = QPStatus::Infeasible;
    Vec x;
    Vec lambda_eq; // grad f + A_eq^T lambda_eq + A_in^T mu_in = 0
    Vec mu_in;     // >= 0
    double objective = 0.0;
    int iterations = 0;
};

/// min 1/2 x^T H x + g^T x  s.t.  A_eq x = b_eq,  A_in x <= b_in,  H positive definite.
/// Dense dual active-set method of Goldfarb and Idnani.
QPResult solve_qp(const Mat& H, const Vec& g, const Mat& A_eq, const Vec& b_eq, const Mat& A_in, const Vec& b_in,
                  int max_iter = -1);

} // namespace rampc
