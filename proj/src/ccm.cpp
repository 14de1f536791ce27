#include "rampc/ccm.hpp"

#include <Eigen/Cholesky>

namespace rampc {

void CCM::prepare()
{
    require(W.rows() == W.cols(), "CCM: W must be square");
    require(Y.cols() == W.rows() && Y.num_vars() == W.num_vars(), "CCM: Y shape does not match W");
    require(rho_c > 0.0, "CCM: contraction rate must be positive");
    dW_.clear();
    for (int i = 0; i < W.num_vars(); ++i) dW_.push_back(W.derivative(i));
}

CCM CCM::constant(const Mat& W, const Mat& Y, double rho_c)
{
    const int n = static_cast<int>(W.rows());
    CCM c;
    c.W = MatrixPolynomial::constant(n, W);
    c.Y = MatrixPolynomial::constant(n, Y);
    c.rho_c = rho_c;
    c.prepare();
    return c;
}

MetricPoint eval_metric_point(const CCM& ccm, const Vec& x)
{
    MetricPoint mp;
    mp.W = ccm.W.eval(x);
    mp.W = 0.5 * (mp.W + mp.W.transpose());
    Eigen::LLT<Mat> llt(mp.W);
    if (llt.info() != Eigen::Success) throw CCMDomainError("W(x) is not positive definite");
    const Mat I = Mat::Identity(mp.W.rows(), mp.W.cols());
    mp.M = llt.solve(I);
    mp.M = 0.5 * (mp.M + mp.M.transpose());
    Eigen::LLT<Mat> lltM(mp.M);
    if (lltM.info() != Eigen::Success) throw CCMDomainError("M(x) Cholesky factorisation failed");
    mp.R = lltM.matrixU();
    mp.K = llt.solve(ccm.Y.eval(x).transpose()).transpose();
    return mp;
}

Mat eval_metric(const CCM& ccm, const Vec& x) { return eval_metric_point(ccm, x).M; }

Mat eval_metric_sqrt(const CCM& ccm, const Vec& x) { return eval_metric_point(ccm, x).R; }

Mat eval_feedback_gain(const CCM& ccm, const Vec& x) { return eval_metric_point(ccm, x).K; }

Mat eval_W_dot(const CCM& ccm, const Vec& x, const Vec& xdot)
{
    Mat Wd = Mat::Zero(ccm.n(), ccm.n());
    const auto& dW = ccm.dW();
    require(static_cast<int>(dW.size()) == ccm.W.num_vars(), "CCM::prepare() was not called");
    for (int i = 0; i < ccm.W.num_vars(); ++i) {
        if (xdot(i) == 0.0 || dW[static_cast<std::size_t>(i)].terms().empty()) continue;
        Wd.noalias() += xdot(i) * dW[static_cast<std::size_t>(i)].eval(x);
    }
    return Wd;
}

Mat cholesky_factor_derivative(const Mat& R, const Mat& dM)
{
    // M = L L^T with L = R^T:  dL = L * Phi(L^{-1} dM L^{-T}),
    // Phi keeps the strict lower triangle and half the diagonal.
    const Mat L = R.transpose();
    const auto Ltri = L.triangularView<Eigen::Lower>();
    Mat S = Ltri.solve(dM);
    S = Ltri.solve(S.transpose()).transpose();
    Mat Phi = S.triangularView<Eigen::StrictlyLower>();
    Phi.diagonal() = 0.5 * S.diagonal();
    return (L * Phi).transpose();
}

std::vector<Mat> eval_metric_sqrt_derivatives(const CCM& ccm, const MetricPoint& mp, const Vec& x)
{
    std::vector<Mat> dR(static_cast<std::size_t>(ccm.n()));
    for (int i = 0; i < ccm.n(); ++i) {
        const auto& dWi = ccm.dW()[static_cast<std::size_t>(i)];
        if (dWi.terms().empty()) {
            dR[static_cast<std::size_t>(i)] = Mat::Zero(ccm.n(), ccm.n());
            continue;
        }
        const Mat dM = -mp.M * dWi.eval(x) * mp.M;
        dR[static_cast<std::size_t>(i)] = cholesky_factor_derivative(mp.R, dM);
    }
    return dR;
}

} // namespace rampc
