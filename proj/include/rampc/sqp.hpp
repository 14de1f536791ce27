#pragma once

#include "rampc/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace rampc {

/// Constraint block: writes c(x) and, when J is non-null, its dense Jacobian.
using ConstraintBlock = std::function<void(const Vec& x, Vec& c, Mat* J)>;

/// min f(x)  s.t.  c_eq(x) = 0,  c_in(x) <= 0,  lb <= x <= ub.
struct NLPProblem {
    int n = 0;
    int n_eq = 0;
    int n_in = 0;
    std::function<double(const Vec& x, Vec* grad)> objective;
    ConstraintBlock eq;
    ConstraintBlock ineq;
    /// Optional positive semidefinite part of the Lagrangian Hessian (for example
    /// Gauss-Newton of a least-squares cost); quasi-Newton covers the rest.
    std::function<Mat(const Vec& x)> hessian_base;
    Vec lb; // -inf allowed
    Vec ub; // +inf allowed
    Vec x0;
};

enum class SolveStatus { Converged, MaxIterations, Infeasible, LineSearchFailed };

std::string to_string(SolveStatus s);

struct SQPOptions {
    int max_iter = 200;
    double kkt_tol = 1e-6;
    double feas_tol = 1e-6;
    double step_tol = 1e-10;
    int restoration_iter = 100;
    /// Initial Hessian approximation; identity when empty or mis-sized.
    Mat H0;
    /// Initial quasi-Newton scale when the problem supplies a base Hessian.
    double base_shift = 1e-2;
};

struct SQPIteration {
    int iter = 0;
    double f = 0.0;
    double violation = 0.0;
    double stationarity = 0.0;
    double step = 0.0;
    double alpha = 0.0;
    double penalty = 0.0;
    int qp_iterations = 0;
};

struct SQPResult {
    SolveStatus status = SolveStatus::MaxIterations;
    Vec x;
    double f = 0.0;
    Vec lambda_eq;
    Vec mu_in;
    double violation = 0.0;
    double stationarity = 0.0;
    int iterations = 0;
    Mat H; // final quasi-Newton matrix (without the base part), reusable as a warm start
    std::vector<SQPIteration> log;
};

/// l1 violation sum |c_eq| + sum max(0, c_in) + bound violations.
double constraint_violation(const NLPProblem& nlp, const Vec& x);
/// Max-norm violation.
double max_violation(const NLPProblem& nlp, const Vec& x);

/// Levenberg-Marquardt on the stacked violation vector, projected onto the bounds.
Vec restore_feasibility(const NLPProblem& nlp, const Vec& x0, int max_iter, double tol);

SQPResult solve_sqp(const NLPProblem& nlp, const SQPOptions& opts = {});

void write_sqp_log(const std::string& path, const SQPResult& res);

} // namespace rampc
