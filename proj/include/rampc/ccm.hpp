#pragma once

#include "rampc/polynomial.hpp"
#include "rampc/types.hpp"

#include <string>
#include <vector>

namespace rampc {

/// Control contraction metric in the dual form W = M^{-1}, Y = K W.
struct CCM {
    MatrixPolynomial W; // n x n
    MatrixPolynomial Y; // m x n
    double rho_c = 0.0;
    /// Constant bounds M_lower <= M(x) <= M_upper; empty until computed or loaded.
    Mat M_lower;
    Mat M_upper;
    std::string metadata; // serialised JSON, carried through untouched

    int n() const { return W.rows(); }
    int m() const { return Y.rows(); }
    bool has_bounds() const { return M_lower.size() > 0 && M_upper.size() > 0; }

    /// Cache the partial derivatives of W.
    void prepare();
    const std::vector<MatrixPolynomial>& dW() const { return dW_; }
    bool metric_is_constant() const { return W.is_constant(); }

    static CCM constant(const Mat& W, const Mat& Y, double rho_c);

private:
    std::vector<MatrixPolynomial> dW_;
};

/// Everything derived from one factorisation of W(x).
struct MetricPoint {
    Mat W;
    Mat M;
    Mat R; // upper Cholesky factor, R^T R = M
    Mat K;
};

MetricPoint eval_metric_point(const CCM& ccm, const Vec& x);
Mat eval_metric(const CCM& ccm, const Vec& x);
Mat eval_metric_sqrt(const CCM& ccm, const Vec& x);
Mat eval_feedback_gain(const CCM& ccm, const Vec& x);
/// dW/dt along xdot.
Mat eval_W_dot(const CCM& ccm, const Vec& x, const Vec& xdot);

/// dR/dx_i for every state coordinate at the point mp = eval_metric_point(ccm, x).
std::vector<Mat> eval_metric_sqrt_derivatives(const CCM& ccm, const MetricPoint& mp, const Vec& x);

/// Directional derivative of the upper Cholesky factor R of M, given dM.
Mat cholesky_factor_derivative(const Mat& R, const Mat& dM);

} // namespace rampc
