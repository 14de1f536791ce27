#include "rampc/geodesic.hpp"
#include "rampc/minimize.hpp"

#include <cmath>
#include <limits>

namespace rampc {

double discrete_energy(const CCM& ccm, const ChebyshevBasis& basis, const Mat& P, Mat* grad)
{
    const int n = ccm.n();
    const bool flat = ccm.metric_is_constant();
    const Mat gam = P * basis.Phi.transpose();   // n x Q
    const Mat gams = P * basis.dPhi.transpose(); // n x Q
    if (grad) grad->setZero(n, P.cols());
    double E = 0.0;
    Mat Mc;
    if (flat) Mc = eval_metric(ccm, Vec::Zero(n));
    for (Eigen::Index q = 0; q < basis.quad_s.size(); ++q) {
        const Vec g = gam.col(q);
        const Vec gs = gams.col(q);
        const Mat M = flat ? Mc : eval_metric(ccm, g);
        const Vec Mgs = M * gs;
        const double w = basis.quad_w(q);
        E += w * gs.dot(Mgs);
        if (!grad) continue;
        // d/dP of w * gs^T M(g) gs
        grad->noalias() += (2.0 * w) * Mgs * basis.dPhi.row(q);
        if (!flat) {
            Vec dgam(n);
            for (int k = 0; k < n; ++k) {
                const auto& dWk = ccm.dW()[static_cast<std::size_t>(k)];
                dgam(k) = dWk.terms().empty() ? 0.0 : -Mgs.dot(dWk.eval(g) * Mgs);
            }
            grad->noalias() += w * dgam * basis.Phi.row(q);
        }
    }
    return E;
}

namespace {

GeodesicCurve finish_curve(const CCM& ccm, const ChebyshevBasis& basis, const Mat& P, int iters, bool converged)
{
    GeodesicCurve c;
    c.degree = basis.degree;
    c.nodes = basis.nodes;
    c.values = P;
    Mat dphi_nodes(basis.degree + 1, basis.degree + 1);
    Vec phi, dphi;
    for (int i = 0; i <= basis.degree; ++i) {
        basis.eval(basis.nodes(i), phi, dphi);
        dphi_nodes.row(i) = dphi.transpose();
    }
    c.derivs = P * dphi_nodes.transpose();
    c.energy = std::max(0.0, discrete_energy(ccm, basis, P));
    c.length = std::sqrt(c.energy);
    const Mat gam = P * basis.Phi.transpose();
    const Mat gams = P * basis.dPhi.transpose();
    for (Eigen::Index q = 0; q < basis.quad_s.size(); ++q) {
        const Vec gs = gams.col(q);
        c.arc_length += basis.quad_w(q) * std::sqrt(std::max(0.0, gs.dot(eval_metric(ccm, gam.col(q)) * gs)));
    }
    c.iterations = iters;
    c.converged = converged;
    return c;
}

} // namespace

GeodesicCurve solve_geodesic(const CCM& ccm, const ChebyshevBasis& basis, const Vec& x, const Vec& z,
                             const GeodesicOptions& opts, const Mat* warm_interior)
{
    const int n = ccm.n();
    require_size(x.size(), n, "solve_geodesic: x");
    require_size(z.size(), n, "solve_geodesic: z");
    require(x.allFinite() && z.allFinite(), "solve_geodesic: non-finite endpoint");
    const int D = basis.degree;
    Mat P(n, D + 1);
    for (int i = 0; i <= D; ++i) P.col(i) = z + basis.nodes(i) * (x - z);
    if (warm_interior && warm_interior->cols() == D - 1 && warm_interior->rows() == n)
        P.middleCols(1, D - 1) = *warm_interior;
    P.col(0) = z;
    P.col(D) = x;
    if (D < 2 || (x - z).lpNorm<Eigen::Infinity>() == 0.0) return finish_curve(ccm, basis, P, 0, true);

    const int nv = n * (D - 1);
    auto objective = [&](const Vec& y, Vec& g) {
        Mat Q = P;
        Q.middleCols(1, D - 1) = Eigen::Map<const Mat>(y.data(), n, D - 1);
        Mat G;
        double E;
        try {
            E = discrete_energy(ccm, basis, Q, &G);
        } catch (const CCMDomainError&) {
            g = Vec::Zero(nv);
            return std::numeric_limits<double>::infinity();
        }
        g = Eigen::Map<const Vec>(G.middleCols(1, D - 1).eval().data(), nv);
        return E;
    };
    Mat interior = P.middleCols(1, D - 1);
    const Vec y0 = Eigen::Map<const Vec>(interior.data(), nv);
    // the metric frozen along the initial curve gives a quadratic model; its
    // inverse as the starting BFGS matrix removes most of the ill-conditioning of M
    Mat Hgn = Mat::Zero(nv, nv);
    {
        const Mat gam = P * basis.Phi.transpose();
        Mat Mc;
        if (ccm.metric_is_constant()) Mc = eval_metric(ccm, Vec::Zero(n));
        for (Eigen::Index q = 0; q < basis.quad_s.size(); ++q) {
            const Mat M = ccm.metric_is_constant() ? Mc : eval_metric(ccm, gam.col(q));
            for (int i = 1; i < D; ++i)
                for (int j = 1; j < D; ++j)
                    Hgn.block((i - 1) * n, (j - 1) * n, n, n) +=
                        (2.0 * basis.quad_w(q) * basis.dPhi(q, i) * basis.dPhi(q, j)) * M;
        }
    }
    BfgsOptions bo;
    bo.grad_tol = opts.grad_tol;
    bo.max_iter = opts.max_iter;
    const Eigen::LLT<Mat> llt(Hgn);
    if (llt.info() == Eigen::Success) bo.inv_hessian0 = llt.solve(Mat::Identity(nv, nv));
    const BfgsResult r = bfgs_minimize(objective, y0, bo);
    P.middleCols(1, D - 1) = Eigen::Map<const Mat>(r.x.data(), n, D - 1);
    GeodesicCurve c = finish_curve(ccm, basis, P, r.iterations, r.converged);
    if (!r.converged) throw GeodesicError("geodesic solver did not converge", c);
    return c;
}

GeodesicCurve solve_geodesic(const CCM& ccm, const Vec& x, const Vec& z, const GeodesicOptions& opts)
{
    const ChebyshevBasis basis(opts.degree, opts.quad_points);
    return solve_geodesic(ccm, basis, x, z, opts);
}

double v_delta(const CCM& ccm, const Vec& x, const Vec& z, const GeodesicOptions& opts)
{
    return solve_geodesic(ccm, x, z, opts).length;
}

Vec feedback_kappa(const CCM& ccm, const ChebyshevBasis& basis, const GeodesicCurve& curve, const Vec& v)
{
    Vec u = v;
    if ((curve.values.col(curve.degree) - curve.values.col(0)).lpNorm<Eigen::Infinity>() == 0.0) return u;
    const Mat gam = curve.values * basis.Phi.transpose();
    const Mat gams = curve.values * basis.dPhi.transpose();
    for (Eigen::Index q = 0; q < basis.quad_s.size(); ++q)
        u.noalias() += basis.quad_w(q) * (eval_feedback_gain(ccm, gam.col(q)) * gams.col(q));
    return u;
}

Vec feedback_kappa(const CCM& ccm, const Vec& x, const Vec& z, const Vec& v, const GeodesicOptions& opts)
{
    const ChebyshevBasis basis(opts.degree, opts.quad_points);
    return feedback_kappa(ccm, basis, solve_geodesic(ccm, basis, x, z, opts), v);
}

double riemann_energy(const GeodesicCurve& curve, const CCM& ccm, int quad_points)
{
    const ChebyshevBasis basis(curve.degree, quad_points);
    return discrete_energy(ccm, basis, curve.values);
}

} // namespace rampc
