#include "rampc/reference.hpp"
#include "rampc/sqp.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace rampc {

ReferenceFn quadrotor_reference(double g)
{
    return [g](const Vec& th) {
        require(th.size() == 1 && th(0) > 0.0, "quadrotor_reference: theta_bar must be a positive scalar");
        ReferencePoint r;
        r.z = Vec::Zero(6);
        r.v = Vec::Constant(2, g / (2.0 * th(0)));
        r.dz = Mat::Zero(6, 1);
        r.dv = Mat::Constant(2, 1, -g / (2.0 * th(0) * th(0)));
        return r;
    };
}

namespace {

struct SteadyState {
    const UncertainSystem* sys;
    Mat C, Dv;
    Vec y_d;
    Vec last; // warm start (z, v)
};

Vec solve_steady_state(SteadyState& S, const Vec& theta)
{
    const UncertainSystem& sys = *S.sys;
    const int n = sys.n, m = sys.m;
    NLPProblem nlp;
    nlp.n = n + m;
    nlp.n_eq = n;
    nlp.n_in = sys.r();
    nlp.objective = [&](const Vec& y, Vec* g) {
        const Vec e = S.C * y.head(n) + S.Dv * y.tail(m) - S.y_d;
        if (g) {
            g->resize(n + m);
            g->head(n) = 2.0 * S.C.transpose() * e;
            g->tail(m) = 2.0 * S.Dv.transpose() * e;
        }
        return e.squaredNorm();
    };
    nlp.eq = [&](const Vec& y, Vec& c, Mat* J) {
        const Vec z = y.head(n), v = y.tail(m);
        c = eval_nominal(sys, z, v, theta);
        if (J) {
            const Jacobians jac = eval_jacobians(sys, z, v, theta, Vec::Zero(sys.q));
            J->resize(n, n + m);
            *J << jac.A, jac.Bu;
        }
    };
    nlp.ineq = [&](const Vec& y, Vec& c, Mat* J) {
        const Vec z = y.head(n), v = y.tail(m);
        c = eval_constraints(sys, z, v);
        if (J) {
            J->resize(sys.r(), n + m);
            for (int j = 0; j < sys.r(); ++j) {
                const auto [gx, gu] = sys.constraints[static_cast<std::size_t>(j)].gradient(z, v);
                J->row(j) << gx.transpose(), gu.transpose();
            }
        }
    };
    nlp.lb = Vec::Constant(n + m, -std::numeric_limits<double>::infinity());
    nlp.ub = Vec::Constant(n + m, std::numeric_limits<double>::infinity());
    nlp.x0 = S.last;
    SQPOptions opts;
    opts.kkt_tol = 1e-10;
    opts.feas_tol = 1e-10;
    const SQPResult r = solve_sqp(nlp, opts);
    if (r.status != SolveStatus::Converged && r.violation > 1e-8)
        throw ReferenceError("steady-state program infeasible (" + to_string(r.status) + ")");
    return r.x;
}

} // namespace

ReferenceFn steady_state_reference(const UncertainSystem& sys, const Mat& C, const Mat& Dv, const Vec& y_d,
                                   const Vec& z_guess, const Vec& v_guess)
{
    auto S = std::make_shared<SteadyState>();
    S->sys = &sys;
    S->C = C;
    S->Dv = Dv;
    S->y_d = y_d;
    S->last.resize(sys.n + sys.m);
    S->last << z_guess, v_guess;
    return [S](const Vec& theta) {
        const UncertainSystem& sys = *S->sys;
        const Vec y = solve_steady_state(*S, theta);
        S->last = y;
        ReferencePoint r;
        r.z = y.head(sys.n);
        r.v = y.tail(sys.m);
        r.dz.resize(sys.n, sys.p);
        r.dv.resize(sys.m, sys.p);
        for (int k = 0; k < sys.p; ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(theta(k)));
            Vec tp = theta, tm = theta;
            tp(k) += h;
            tm(k) -= h;
            const Vec yp = solve_steady_state(*S, tp);
            const Vec ym = solve_steady_state(*S, tm);
            r.dz.col(k) = (yp.head(sys.n) - ym.head(sys.n)) / (2.0 * h);
            r.dv.col(k) = (yp.tail(sys.m) - ym.tail(sys.m)) / (2.0 * h);
        }
        S->last = y;
        return r;
    };
}

ReferencePoint reference_point(const ReferenceFn& ref, const Vec& theta_bar)
{
    return ref(theta_bar);
}

} // namespace rampc
