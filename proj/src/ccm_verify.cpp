#include "rampc/ccm_verify.hpp"
#include "rampc/polytope.hpp"

#include <Eigen/Eigenvalues>

namespace rampc {

namespace {

std::vector<Vec> vertices_or_origin(const Polytope& P, int dim)
{
    if (dim == 0) return {Vec(0)};
    return vertex_list(P);
}

double residual_eig(const UncertainSystem& sys, const CCM& ccm, const MetricPoint& mp, const Vec& x, const Vec& u,
                    const Vec& theta, const Vec& d)
{
    const Jacobians J = eval_jacobians(sys, x, u, theta, d);
    const Mat Acl = J.A + J.Bu * mp.K;
    const Vec xdot = eval_dynamics(sys, x, u, theta, d);
    const Mat Mdot = -mp.M * eval_W_dot(ccm, x, xdot) * mp.M;
    Mat C = Mdot + mp.M * Acl + Acl.transpose() * mp.M + 2.0 * ccm.rho_c * mp.M;
    C = 0.5 * (C + C.transpose());
    return Eigen::SelfAdjointEigenSolver<Mat>(C, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

} // namespace

double contraction_residual(const UncertainSystem& sys, const CCM& ccm, const Vec& x, const Vec& u,
                            const Vec& theta, const Vec& d)
{
    return residual_eig(sys, ccm, eval_metric_point(ccm, x), x, u, theta, d);
}

VerificationReport verify_ccm(const UncertainSystem& sys, const CCM& ccm, const std::vector<Sample>& samples,
                              double tol_rel)
{
    require(ccm.n() == sys.n && ccm.m() == sys.m, "verify_ccm: certificate dimensions differ from the system");
    VerificationReport rep;
    rep.tol_rel = tol_rel;
    rep.num_samples = samples.size();
    const auto thetas = vertices_or_origin(sys.Theta0, sys.p);
    const auto ds = vertices_or_origin(sys.D, sys.q);
    for (const auto& s : samples) {
        MetricPoint mp;
        try {
            mp = eval_metric_point(ccm, s.x);
        } catch (const CCMDomainError&) {
            ++rep.non_spd;
            continue;
        }
        const auto ev = Eigen::SelfAdjointEigenSolver<Mat>(mp.M, Eigen::EigenvaluesOnly).eigenvalues();
        rep.M_eig_min = std::min(rep.M_eig_min, ev.minCoeff());
        rep.M_eig_max = std::max(rep.M_eig_max, ev.maxCoeff());
        const double Mnorm = ev.maxCoeff();
        for (const auto& th : thetas) {
            for (const auto& d : ds) {
                const double e = residual_eig(sys, ccm, mp, s.x, s.u, th, d);
                ++rep.num_checks;
                if (e / Mnorm > rep.worst_normalized) {
                    rep.worst_normalized = e / Mnorm;
                    rep.worst_eig = e;
                    rep.worst_x = s.x;
                    rep.worst_u = s.u;
                    rep.worst_theta = th;
                    rep.worst_d = d;
                }
            }
        }
    }
    rep.pass = rep.non_spd == 0 && rep.num_checks > 0 && rep.worst_normalized <= tol_rel;
    return rep;
}

VerificationReport verify_ccm(const UncertainSystem& sys, const CCM& ccm, const SampleSpec& spec, double tol_rel)
{
    return verify_ccm(sys, ccm, generate_samples(sys, spec), tol_rel);
}

void set_metric_bounds(CCM& ccm, const std::vector<Sample>& samples)
{
    require(!samples.empty(), "set_metric_bounds: empty sample set");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& s : samples) {
        const auto ev =
            Eigen::SelfAdjointEigenSolver<Mat>(eval_metric(ccm, s.x), Eigen::EigenvaluesOnly).eigenvalues();
        lo = std::min(lo, ev.minCoeff());
        hi = std::max(hi, ev.maxCoeff());
    }
    ccm.M_lower = lo * Mat::Identity(ccm.n(), ccm.n());
    ccm.M_upper = hi * Mat::Identity(ccm.n(), ccm.n());
}

} // namespace rampc
