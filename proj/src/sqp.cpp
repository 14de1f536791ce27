#include "rampc/sqp.hpp"
#include "rampc/qp.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace rampc {

std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::LineSearchFailed: return "line_search_failed";
    }
    return "unknown";
}

namespace {

struct Eval {
    double f = 0.0;
    Vec g;
    Vec ce, ci;
    Mat Je, Ji;
};

/// Callbacks that leave their domain (metric not positive definite, diverging
/// integration) mark the point as non-finite so that trial steps get rejected.
Eval evaluate(const NLPProblem& nlp, const Vec& x, bool derivs)
{
    Eval e;
    e.ce.resize(nlp.n_eq);
    e.ci.resize(nlp.n_in);
    try {
        e.f = nlp.objective(x, derivs ? &e.g : nullptr);
        if (nlp.n_eq > 0) nlp.eq(x, e.ce, derivs ? &e.Je : nullptr);
        if (nlp.n_in > 0) nlp.ineq(x, e.ci, derivs ? &e.Ji : nullptr);
    } catch (const CCMDomainError&) {
        if (derivs) throw;
        e.f = std::numeric_limits<double>::infinity();
        e.ce.setConstant(std::numeric_limits<double>::infinity());
        e.ci.setConstant(std::numeric_limits<double>::infinity());
        return e;
    } catch (const IntegrationError&) {
        if (derivs) throw;
        e.f = std::numeric_limits<double>::infinity();
        e.ce.setConstant(std::numeric_limits<double>::infinity());
        e.ci.setConstant(std::numeric_limits<double>::infinity());
        return e;
    }
    if (derivs) {
        if (nlp.n_eq == 0) e.Je.resize(0, nlp.n);
        if (nlp.n_in == 0) e.Ji.resize(0, nlp.n);
    }
    return e;
}

double l1_violation(const Eval& e)
{
    return e.ce.cwiseAbs().sum() + e.ci.cwiseMax(0.0).sum();
}

double bound_violation(const NLPProblem& nlp, const Vec& x)
{
    return (nlp.lb - x).cwiseMax(0.0).sum() + (x - nlp.ub).cwiseMax(0.0).sum();
}

Vec project(const NLPProblem& nlp, const Vec& x)
{
    return x.cwiseMax(nlp.lb).cwiseMin(nlp.ub);
}

/// Bound rows of the QP in p:  p <= ub - x,  -p <= x - lb (finite bounds only).
/// Variables with lb == ub are returned separately as equalities p_i = lb_i - x_i.
void bound_rows(const NLPProblem& nlp, const Vec& x, Mat& A, Vec& b, std::vector<std::pair<int, double>>& map,
                std::vector<int>& fixed)
{
    map.clear();
    fixed.clear();
    for (int i = 0; i < nlp.n; ++i) {
        if (nlp.lb(i) == nlp.ub(i)) {
            fixed.push_back(i);
            continue;
        }
        if (std::isfinite(nlp.ub(i))) map.push_back({i, 1.0});
        if (std::isfinite(nlp.lb(i))) map.push_back({i, -1.0});
    }
    A = Mat::Zero(static_cast<Eigen::Index>(map.size()), nlp.n);
    b.resize(A.rows());
    for (std::size_t k = 0; k < map.size(); ++k) {
        const auto [i, s] = map[k];
        A(static_cast<Eigen::Index>(k), i) = s;
        b(static_cast<Eigen::Index>(k)) = s > 0 ? nlp.ub(i) - x(i) : x(i) - nlp.lb(i);
    }
}

Vec lagrangian_gradient(const Eval& e, const Vec& lam, const Vec& mu)
{
    Vec gl = e.g;
    if (e.Je.rows() > 0) gl.noalias() += e.Je.transpose() * lam;
    if (e.Ji.rows() > 0) gl.noalias() += e.Ji.transpose() * mu;
    return gl;
}

} // namespace

double constraint_violation(const NLPProblem& nlp, const Vec& x)
{
    return l1_violation(evaluate(nlp, x, false)) + bound_violation(nlp, x);
}

double max_violation(const NLPProblem& nlp, const Vec& x)
{
    const Eval e = evaluate(nlp, x, false);
    double v = 0.0;
    if (e.ce.size()) v = std::max(v, e.ce.cwiseAbs().maxCoeff());
    if (e.ci.size()) v = std::max(v, e.ci.maxCoeff());
    v = std::max(v, (nlp.lb - x).maxCoeff());
    v = std::max(v, (x - nlp.ub).maxCoeff());
    return v;
}

Vec restore_feasibility(const NLPProblem& nlp, const Vec& x0, int max_iter, double tol)
{
    Vec x = project(nlp, x0);
    double mu = 1e-3;
    auto residual = [&](const Eval& e) {
        Vec r(e.ce.size() + e.ci.size());
        r << e.ce, e.ci.cwiseMax(0.0);
        return r;
    };
    Eval e = evaluate(nlp, x, true);
    Vec r = residual(e);
    for (int it = 0; it < max_iter; ++it) {
        if (r.size() == 0 || r.lpNorm<Eigen::Infinity>() <= tol) break;
        Mat J(r.size(), nlp.n);
        J.topRows(e.ce.size()) = e.Je;
        for (Eigen::Index i = 0; i < e.ci.size(); ++i)
            J.row(e.ce.size() + i) = e.ci(i) > 0.0 ? Mat(e.Ji.row(i)) : Mat(Mat::Zero(1, nlp.n));
        const Mat JtJ = J.transpose() * J;
        const Vec Jtr = J.transpose() * r;
        bool accepted = false;
        for (int k = 0; k < 12; ++k) {
            const Mat A = JtJ + mu * Mat::Identity(nlp.n, nlp.n);
            const Vec dx = -A.ldlt().solve(Jtr);
            const Vec xn = project(nlp, x + dx);
            const Vec rn = residual(evaluate(nlp, xn, false));
            if (rn.squaredNorm() < r.squaredNorm()) {
                x = xn;
                e = evaluate(nlp, xn, true);
                r = rn;
                mu = std::max(1e-12, mu * 0.3);
                accepted = true;
                break;
            }
            mu *= 10.0;
        }
        if (!accepted) break;
    }
    return x;
}

SQPResult solve_sqp(const NLPProblem& nlp, const SQPOptions& opts)
{
    require(nlp.lb.size() == nlp.n && nlp.ub.size() == nlp.n && nlp.x0.size() == nlp.n,
            "solve_sqp: bounds or initial guess have wrong size");
    SQPResult res;
    Vec x = project(nlp, nlp.x0);
    const bool structured = static_cast<bool>(nlp.hessian_base);
    // with a base Hessian the quasi-Newton part only carries the remaining curvature
    const Mat B0 = Mat::Identity(nlp.n, nlp.n) * (structured ? opts.base_shift : 1.0);
    Mat H = (opts.H0.rows() == nlp.n && opts.H0.cols() == nlp.n) ? opts.H0 : B0;
    Eval e = evaluate(nlp, x, true);
    Mat Hb = structured ? nlp.hessian_base(x) : Mat();
    Vec lam = Vec::Zero(nlp.n_eq), mu = Vec::Zero(nlp.n_in);
    double nu = 1.0;
    Mat Ab;
    Vec bb;
    std::vector<std::pair<int, double>> bmap;
    std::vector<int> fixed;
    bool restored_once = false;

    auto solve_subproblem = [&](const Vec& ce, const Vec& ci, const Vec& grad) {
        bound_rows(nlp, x, Ab, bb, bmap, fixed);
        Mat Ain(e.Ji.rows() + Ab.rows(), nlp.n);
        Vec bin(Ain.rows());
        Ain << e.Ji, Ab;
        bin << -ci, bb;
        const auto nf = static_cast<Eigen::Index>(fixed.size());
        Mat Aeq = Mat::Zero(e.Je.rows() + nf, nlp.n);
        Vec beq(Aeq.rows());
        Aeq.topRows(e.Je.rows()) = e.Je;
        beq.head(e.Je.rows()) = -ce;
        for (Eigen::Index k = 0; k < nf; ++k) {
            const int i = fixed[static_cast<std::size_t>(k)];
            Aeq(e.Je.rows() + k, i) = 1.0;
            beq(e.Je.rows() + k) = nlp.lb(i) - x(i);
        }
        return solve_qp(structured ? Mat(Hb + H) : H, grad, Aeq, beq, Ain, bin);
    };

    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        QPResult qp = solve_subproblem(e.ce, e.ci, e.g);
        if (qp.status == QPStatus::Optimal && !qp.x.allFinite()) qp.status = QPStatus::NotConvex;
        if (qp.status == QPStatus::NotConvex) {
            H = B0;
            qp = solve_subproblem(e.ce, e.ci, e.g);
        }
        if (qp.status != QPStatus::Optimal) {
            // linearisation inconsistent: move towards feasibility and retry once
            if (restored_once) {
                res.status = SolveStatus::Infeasible;
                break;
            }
            restored_once = true;
            x = restore_feasibility(nlp, x, opts.restoration_iter, 0.1 * opts.feas_tol);
            e = evaluate(nlp, x, true);
            if (structured) Hb = nlp.hessian_base(x);
            H = B0;
            if (l1_violation(e) > opts.feas_tol * (1 + nlp.n_eq + nlp.n_in) &&
                max_violation(nlp, x) > opts.feas_tol) {
                res.status = SolveStatus::Infeasible;
                break;
            }
            continue;
        }
        const Vec p = qp.x;
        const Vec lam_new = qp.lambda_eq.head(nlp.n_eq);
        const Vec mu_new = qp.mu_in.head(nlp.n_in);
        const Vec mu_b = qp.mu_in.tail(static_cast<Eigen::Index>(bmap.size()));
        const Vec lam_fix = qp.lambda_eq.tail(static_cast<Eigen::Index>(fixed.size()));

        // KKT measures at the current point with the QP multipliers
        Vec gl = lagrangian_gradient(e, lam_new, mu_new);
        for (std::size_t k = 0; k < bmap.size(); ++k) gl(bmap[k].first) += bmap[k].second * mu_b(static_cast<Eigen::Index>(k));
        for (std::size_t k = 0; k < fixed.size(); ++k) gl(fixed[k]) += lam_fix(static_cast<Eigen::Index>(k));
        const double viol = std::max(e.ce.size() ? e.ce.cwiseAbs().maxCoeff() : 0.0,
                                     e.ci.size() ? e.ci.maxCoeff() : 0.0);
        const double stat = gl.lpNorm<Eigen::Infinity>() / (1.0 + e.g.lpNorm<Eigen::Infinity>());
        const double pn = p.lpNorm<Eigen::Infinity>();
        res.stationarity = stat;
        res.violation = std::max(0.0, viol);
        if (viol <= opts.feas_tol && (stat <= opts.kkt_tol || pn <= opts.step_tol * (1.0 + x.lpNorm<Eigen::Infinity>()))) {
            lam = lam_new;
            mu = mu_new;
            res.status = SolveStatus::Converged;
            res.log.push_back({res.iterations, e.f, viol, stat, pn, 0.0, nu, qp.iterations});
            break;
        }

        const double mult = std::max(lam_new.size() ? lam_new.cwiseAbs().maxCoeff() : 0.0,
                                     mu_new.size() ? mu_new.maxCoeff() : 0.0);
        // Powell's update: follows the multipliers down as well as up
        nu = std::max(1.1 * mult + 1e-3, 0.5 * (nu + 1.1 * mult + 1e-3));
        const double v0 = l1_violation(e);
        const double phi0 = e.f + nu * v0;
        const double dphi = e.g.dot(p) - nu * v0;

        double alpha = 1.0;
        Vec xn;
        Eval en;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            xn = project(nlp, x + alpha * p);
            en = evaluate(nlp, xn, false);
            const double phi = en.f + nu * l1_violation(en);
            if (std::isfinite(phi) && phi <= phi0 + 1e-4 * alpha * std::min(dphi, 0.0)) {
                accepted = true;
                break;
            }
            if (ls == 0 && v0 < 1e-2 * (1.0 + std::abs(e.f))) {
                // second-order correction of the full step
                Vec ce_soc = en.ce - e.Je * p;
                Vec ci_soc = en.ci - e.Ji * p;
                const QPResult soc = solve_subproblem(ce_soc, ci_soc, e.g);
                if (soc.status == QPStatus::Optimal && soc.x.allFinite()) {
                    const Vec xs = project(nlp, x + soc.x);
                    const Eval es = evaluate(nlp, xs, false);
                    const double phis = es.f + nu * l1_violation(es);
                    if (std::isfinite(phis) && phis <= phi0 + 1e-4 * std::min(dphi, 0.0)) {
                        xn = xs;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (H == B0) {
                res.status = SolveStatus::LineSearchFailed;
                break;
            }
            H = B0;
            continue;
        }

        Eval enew = evaluate(nlp, xn, true);
        const Vec s = xn - x;
        Vec y = lagrangian_gradient(enew, lam_new, mu_new) - lagrangian_gradient(e, lam_new, mu_new);
        Mat Hb_new;
        if (structured) {
            Hb_new = nlp.hessian_base(xn);
            y -= Hb_new * s;
        }
        const Vec Hs = H * s;
        const double sHs = s.dot(Hs);
        const double sy = s.dot(y);
        if (sHs > 1e-16) {
            const double th = sy >= 0.2 * sHs ? 1.0 : 0.8 * sHs / (sHs - sy);
            const Vec r = th * y + (1.0 - th) * Hs;
            const double sr = s.dot(r);
            if (sr > 1e-16) H += -Hs * Hs.transpose() / sHs + r * r.transpose() / sr;
        }
        res.log.push_back({res.iterations, e.f, viol, stat, pn, alpha, nu, qp.iterations});
        x = xn;
        e = std::move(enew);
        if (structured) Hb = std::move(Hb_new);
        lam = lam_new;
        mu = mu_new;
    }

    res.x = x;
    res.f = e.f;
    res.lambda_eq = lam;
    res.mu_in = mu;
    res.violation = std::max(0.0, max_violation(nlp, x));
    res.H = H;
    return res;
}

void write_sqp_log(const std::string& path, const SQPResult& res)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << "iter,f,violation,stationarity,step,alpha,penalty,qp_iterations\n" << std::setprecision(12);
    for (const auto& r : res.log)
        out << r.iter << ',' << r.f << ',' << r.violation << ',' << r.stationarity << ',' << r.step << ','
            << r.alpha << ',' << r.penalty << ',' << r.qp_iterations << '\n';
}

} // namespace rampc
