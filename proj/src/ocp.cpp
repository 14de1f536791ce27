#include "rampc/ocp.hpp"
#include "rampc/polytope_ops.hpp"
#include "rampc/sampling.hpp"
#include "rampc/tube.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rampc {

void MPCConfig::prepare(int n, int m)
{
    if (Q.size() == 0) Q = Mat::Identity(n, n);
    if (R.size() == 0) R = Mat::Identity(m, m);
    require(N >= 1, "MPCConfig: N must be at least 1");
    require(Ts > 0.0, "MPCConfig: T_s must be positive");
    require(substeps >= 1, "MPCConfig: substeps must be at least 1");
    require(Q.rows() == n && Q.cols() == n && R.rows() == m && R.cols() == m, "MPCConfig: Q or R has wrong size");
    const auto spd = [](const Mat& S) {
        if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + S.cwiseAbs().maxCoeff())) return false;
        return Eigen::SelfAdjointEigenSolver<Mat>(S).eigenvalues().minCoeff() > 0.0;
    };
    require(spd(Q) && spd(R), "MPCConfig: Q and R must be symmetric positive definite");
    require(geodesic.degree >= 1, "MPCConfig: geodesic degree must be at least 1");
    require(delta_floor >= 0.0, "MPCConfig: delta_floor must be non-negative");
}

namespace {

struct Interval {
    Vec z;
    double cost = 0.0;
    Mat Sz; // d z_end / d(z0, v, theta_bar)
    Vec gc; // d cost / d(z0, v, theta_bar)
    Mat Hc; // Gauss-Newton cost Hessian in (z0, v, theta_bar)
};

Interval shoot(const UncertainSystem& sys, const Mat& Q, const Mat& R, const ReferencePoint& ref, const Vec& z0,
               const Vec& v, const Vec& th, double Ts, int substeps, bool derivs)
{
    const int n = sys.n, m = sys.m, p = sys.p, cols = n + m + p;
    const double h = Ts / substeps;
    const Vec d0 = Vec::Zero(sys.q);
    Interval out;
    out.z = z0;
    Mat S;
    if (derivs) {
        S = Mat::Zero(n, cols);
        S.leftCols(n).setIdentity();
        out.gc = Vec::Zero(cols);
        out.Hc = Mat::Zero(cols, cols);
    }
    Mat Fv; // d(v - v_ref) / d(z0, v, theta_bar)
    if (derivs) {
        Fv = Mat::Zero(m, cols);
        Fv.middleCols(n, m).setIdentity();
        if (p > 0) Fv.rightCols(p) = -ref.dv;
    }
    const Mat FRF = derivs ? Mat(2.0 * Fv.transpose() * R * Fv) : Mat();
    auto gn = [&](const Mat& Sz) {
        Mat Ez = Sz;
        if (p > 0) Ez.rightCols(p) -= ref.dz;
        return Mat(2.0 * Ez.transpose() * Q * Ez + FRF);
    };
    const Vec ev = v - ref.v;
    const double lv = ev.dot(R * ev);
    Vec lv_v, lv_th;
    if (derivs) {
        lv_v = 2.0 * R * ev;
        lv_th = -ref.dv.transpose() * lv_v;
    }
    auto stage = [&](const Vec& z, const Mat& Sz, Vec& kz, double& kl, Mat& Dz, Vec& Dl) {
        kz = eval_nominal(sys, z, v, th);
        const Vec ez = z - ref.z;
        kl = ez.dot(Q * ez) + lv;
        if (!derivs) return;
        const Jacobians J = eval_jacobians(sys, z, v, th, d0);
        Dz = J.A * Sz;
        Dz.middleCols(n, m) += J.Bu;
        if (p > 0) Dz.rightCols(p) += sys.G(z, v);
        const Vec qz = 2.0 * Q * ez;
        Dl = Sz.transpose() * qz;
        Dl.segment(n, m) += lv_v;
        if (p > 0) Dl.tail(p) += lv_th - ref.dz.transpose() * qz;
    };
    for (int s = 0; s < substeps; ++s) {
        Vec k1, k2, k3, k4, g1, g2, g3, g4;
        double l1, l2, l3, l4;
        Mat D1, D2, D3, D4;
        const Vec& z = out.z;
        const Mat S1 = S;
        stage(z, S1, k1, l1, D1, g1);
        const Mat S2 = derivs ? Mat(S + 0.5 * h * D1) : S;
        stage(z + 0.5 * h * k1, S2, k2, l2, D2, g2);
        const Mat S3 = derivs ? Mat(S + 0.5 * h * D2) : S;
        stage(z + 0.5 * h * k2, S3, k3, l3, D3, g3);
        const Mat S4 = derivs ? Mat(S + h * D3) : S;
        stage(z + h * k3, S4, k4, l4, D4, g4);
        if (derivs) out.Hc += h / 6.0 * (gn(S1) + 2.0 * gn(S2) + 2.0 * gn(S3) + gn(S4));
        out.z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.cost += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        if (derivs) {
            S += h / 6.0 * (D1 + 2.0 * D2 + 2.0 * D3 + D4);
            out.gc += h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
        }
        if (!out.z.allFinite()) throw IntegrationError("nominal shooting diverged", s);
    }
    out.Sz = std::move(S);
    return out;
}

/// Extra constant scaling so that f_delta + lambda * eta <= 0 still holds at the
/// vertices: the slope in delta is at most -(lambda - max gain).
double rigid_floor_margin(const TubeConstants& consts, const std::vector<Vec>& thetas, const Vec& th, double eta)
{
    if (eta <= 0.0) return 0.0;
    double gmax = 0.0;
    for (const auto& t : thetas)
        if (t.size() > 0) gmax = std::max(gmax, consts.L_G.dot((t - th).cwiseAbs()));
    require(gmax < consts.lambda(), "build_ocp: parameter gain exceeds the contraction rate");
    return consts.lambda() * eta / (consts.lambda() - gmax);
}

std::vector<Vec> vertices_or_origin(const Polytope& P, int dim)
{
    if (dim == 0) return {Vec(0)};
    return vertex_list(P);
}

/// Norm of R w with w = f_w(z, v, theta_i, d_j) - f_w(z, v, theta_bar, 0), and its
/// partial derivatives in z, v, theta_bar.
struct MismatchTerm {
    double value = 0.0;
    Vec gz, gv, gth;
};

MismatchTerm mismatch(const UncertainSystem& sys, const MetricPoint& mp, const std::vector<Mat>& dR,
                      const Jacobians* J0, const Vec& z, const Vec& v, const Vec& th_i, const Vec& d_j,
                      const Vec& th, const Mat& Gz, const Mat& Ez, bool derivs)
{
    MismatchTerm t;
    Vec w = Vec::Zero(sys.n);
    if (sys.p > 0) w.noalias() += Gz * (th_i - th);
    if (sys.q > 0) w.noalias() += Ez * d_j;
    const Vec r = mp.R * w;
    t.value = r.norm();
    if (!derivs) return t;
    const Vec u = t.value > 1e-14 ? Vec(r / t.value) : Vec::Zero(sys.n);
    const Jacobians Ji = eval_jacobians(sys, z, v, th_i, d_j);
    const Vec Ru = mp.R.transpose() * u;
    t.gz = (Ji.A - J0->A).transpose() * Ru;
    if (!dR.empty())
        for (int l = 0; l < sys.n; ++l) t.gz(l) += u.dot(dR[static_cast<std::size_t>(l)] * w);
    t.gv = (Ji.Bu - J0->Bu).transpose() * Ru;
    t.gth = sys.p > 0 ? Vec(-Gz.transpose() * Ru) : Vec(0);
    return t;
}

} // namespace

OCP::OCP(UncertainSystem sys, CCM ccm, TubeConstants consts, Vec x_t, Polytope Theta_t, MPCConfig cfg,
         TerminalSpec terminal)
    : sys_(std::move(sys)), ccm_(std::move(ccm)), consts_(std::move(consts)), x_t_(std::move(x_t)),
      Theta_(std::move(Theta_t)), cfg_(std::move(cfg)), term_(std::move(terminal)),
      basis_(cfg_.geodesic.degree, cfg_.geodesic.quad_points)
{
    const int n = sys_.n, m = sys_.m, p = sys_.p;
    cfg_.prepare(n, m);
    require_size(x_t_.size(), n, "build_ocp: x_t");
    require(static_cast<bool>(term_.reference), "build_ocp: terminal reference missing");
    require(consts_.contractive(), "build_ocp: rho_c - L_D must be positive");
    require_size(consts_.c.size(), sys_.r(), "build_ocp: c_j");
    require_size(consts_.L_G.size(), p, "build_ocp: L_G");
    if (ccm_.dW().empty()) ccm_.prepare();

    if (p > 0 && !Theta_.vertices) Theta_ = with_vertices(Theta_);
    thetas_ = vertices_or_origin(Theta_, p);
    ds_ = vertices_or_origin(sys_.D, sys_.q);
    require(!thetas_.empty() && !ds_.empty(), "build_ocp: empty vertex set");
    signs_.assign(1, Vec(p));
    for (int l = 0; l < p; ++l) {
        std::vector<Vec> next;
        for (const auto& s : signs_)
            for (double sg : {-1.0, 1.0}) {
                Vec t = s;
                t(l) = sg;
                next.push_back(t);
            }
        signs_ = std::move(next);
    }

    Vec th_lo = Vec::Zero(p), th_hi = Vec::Zero(p);
    theta_box_ = true;
    if (p > 0) {
        std::tie(th_lo, th_hi) = bounding_box(sys_.Theta0);
        for (int i = 0; i < sys_.Theta0.num_rows(); ++i)
            if ((sys_.Theta0.A.row(i).array() != 0.0).count() != 1) theta_box_ = false;
        if (!theta_box_) Theta0_rows_ = sys_.Theta0;
    }
    bool zero_d = true;
    for (const auto& d : ds_) zero_d = zero_d && (d.size() == 0 || d.lpNorm<Eigen::Infinity>() == 0.0);
    const bool point_theta = p == 0 || (th_hi - th_lo).lpNorm<Eigen::Infinity>() == 0.0;
    uncertain_ = !(zero_d && point_theta);

    const double lam = consts_.lambda();
    const double lh = lam * cfg_.Ts / cfg_.substeps;
    const double step = 1.0 - lh + lh * lh / 2.0 - lh * lh * lh / 6.0 + lh * lh * lh * lh / 24.0;
    a_ = std::pow(step, cfg_.substeps);
    b_ = (1.0 - a_) / lam;

    Vec th_rigid;
    if (cfg_.rigid) {
        th_rigid = cfg_.rigid_theta_bar.size() == p ? cfg_.rigid_theta_bar : Vec(0.5 * (th_lo + th_hi));
        require(p == 0 || sys_.Theta0.contains(th_rigid, 1e-9), "build_ocp: rigid theta_bar outside Theta_0");
        rigid_delta_ = cfg_.rigid_delta >= 0.0 ? cfg_.rigid_delta
                                               : rigid_tube_delta(sys_, ccm_, consts_, Theta_, th_rigid, cfg_.delta_floor);
    }

    lay_ = {n, m, p, cfg_.N, cfg_.geodesic.degree};
    const int N = cfg_.N, r = sys_.r();
    const int nv = static_cast<int>(thetas_.size() * ds_.size() * signs_.size());
    n_vertex_rows_ = (uncertain_ && !cfg_.rigid) ? nv : 0;

    nlp_.n = lay_.size();
    nlp_.n_eq = N * n + (cfg_.rigid ? 0 : N) + n;
    nlp_.n_in = N * n_vertex_rows_ + N * r + (theta_box_ ? 0 : Theta0_rows_.num_rows()) + 1 +
                (cfg_.rigid ? 0 : 1 + n_vertex_rows_) + r;
    const double inf = std::numeric_limits<double>::infinity();
    nlp_.lb = Vec::Constant(nlp_.n, -inf);
    nlp_.ub = Vec::Constant(nlp_.n, inf);
    for (int k = 0; k <= N; ++k) nlp_.lb(lay_.delta(k)) = 0.0;
    for (int k = 0; k < N; ++k) nlp_.lb(lay_.w_bar(k)) = lam * cfg_.delta_floor;
    nlp_.lb(lay_.delta_f()) = 0.0;
    if (theta_box_ && p > 0) {
        nlp_.lb.segment(lay_.theta(), p) = th_lo;
        nlp_.ub.segment(lay_.theta(), p) = th_hi;
    }
    if (cfg_.rigid) {
        for (int k = 0; k <= N; ++k) nlp_.lb(lay_.delta(k)) = nlp_.ub(lay_.delta(k)) = rigid_delta_;
        for (int k = 0; k < N; ++k) nlp_.lb(lay_.w_bar(k)) = nlp_.ub(lay_.w_bar(k)) = lam * rigid_delta_;
        nlp_.lb(lay_.delta_f()) = nlp_.ub(lay_.delta_f()) = rigid_delta_;
        if (p > 0) {
            nlp_.lb.segment(lay_.theta(), p) = th_rigid;
            nlp_.ub.segment(lay_.theta(), p) = th_rigid;
        }
    }
    nlp_.objective = [this](const Vec& x, Vec* g) { return objective(x, g); };
    nlp_.eq = [this](const Vec& x, Vec& c, Mat* J) { eq(x, c, J); };
    nlp_.ineq = [this](const Vec& x, Vec& c, Mat* J) { ineq(x, c, J); };
    nlp_.hessian_base = [this](const Vec& x) { return evaluate(x, true).Hgn; };
    nlp_.x0 = initial_guess();
}

const OCP::Eval& OCP::evaluate(const Vec& x, bool derivs) const
{
    if (cache_ && (cache_->derivs || !derivs) && cache_->x.size() == x.size() && cache_->x == x) return *cache_;
    require_size(x.size(), lay_.size(), "OCP: decision vector");
    const auto& L = lay_;
    const int n = L.n, m = L.m, p = L.p, N = L.N, D = L.D, r = sys_.r(), nx = L.size();
    Eval e;
    e.x = x;
    e.derivs = derivs;
    e.ceq = Vec::Zero(nlp_.n_eq);
    e.cin = Vec::Zero(nlp_.n_in);
    e.stage = Vec::Zero(N);
    if (derivs) {
        e.grad = Vec::Zero(nx);
        e.Jeq = Mat::Zero(nlp_.n_eq, nx);
        e.Jin = Mat::Zero(nlp_.n_in, nx);
        e.Hgn = Mat::Zero(nx, nx);
    }
    auto zk = [&](int k) { return Vec(x.segment(L.z(k), n)); };
    auto vk = [&](int k) { return Vec(x.segment(L.v(k), m)); };
    const Vec th = x.segment(L.theta(), p);
    const ReferencePoint ref = reference_point(term_.reference, th);
    const double lam = consts_.lambda();
    const bool flat = ccm_.metric_is_constant();
    const Vec d0 = Vec::Zero(sys_.q);
    const double eta = cfg_.delta_floor;

    // shooting defects and cost
    int row = 0;
    for (int k = 0; k < N; ++k) {
        const Interval I = shoot(sys_, cfg_.Q, cfg_.R, ref, zk(k), vk(k), th, cfg_.Ts, cfg_.substeps, derivs);
        e.ceq.segment(row, n) = zk(k + 1) - I.z;
        e.stage(k) = I.cost;
        if (derivs) {
            e.Jeq.block(row, L.z(k + 1), n, n).setIdentity();
            e.Jeq.block(row, L.z(k), n, n) -= I.Sz.leftCols(n);
            e.Jeq.block(row, L.v(k), n, m) -= I.Sz.middleCols(n, m);
            if (p > 0) e.Jeq.block(row, L.theta(), n, p) -= I.Sz.rightCols(p);
            e.grad.segment(L.z(k), n) += I.gc.head(n);
            e.grad.segment(L.v(k), m) += I.gc.segment(n, m);
            if (p > 0) e.grad.segment(L.theta(), p) += I.gc.tail(p);
            // scatter the interval block over (z_k, v_k, theta_bar)
            std::vector<int> idx;
            for (int i = 0; i < n; ++i) idx.push_back(L.z(k) + i);
            for (int i = 0; i < m; ++i) idx.push_back(L.v(k) + i);
            for (int i = 0; i < p; ++i) idx.push_back(L.theta() + i);
            for (std::size_t a = 0; a < idx.size(); ++a)
                for (std::size_t b = 0; b < idx.size(); ++b)
                    e.Hgn(idx[a], idx[b]) += I.Hc(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
        row += n;
    }
    e.f = e.stage.sum();
    if (!cfg_.rigid) {
        for (int k = 0; k < N; ++k, ++row) {
            e.ceq(row) = x(L.delta(k + 1)) - a_ * x(L.delta(k)) - b_ * x(L.w_bar(k));
            if (derivs) {
                e.Jeq(row, L.delta(k + 1)) = 1.0;
                e.Jeq(row, L.delta(k)) = -a_;
                e.Jeq(row, L.w_bar(k)) = -b_;
            }
        }
    }
    e.ceq.segment(row, n) = zk(N) - ref.z;
    if (derivs) {
        e.Jeq.block(row, L.z(N), n, n).setIdentity();
        if (p > 0) e.Jeq.block(row, L.theta(), n, p) = -ref.dz;
    }

    // vertex rows for w_bar at interval start nodes
    row = 0;
    if (n_vertex_rows_ > 0) {
        for (int k = 0; k < N; ++k) {
            const Vec z = zk(k), v = vk(k);
            const double dk = x(L.delta(k));
            const MetricPoint mp = eval_metric_point(ccm_, z);
            const std::vector<Mat> dR = (derivs && !flat) ? eval_metric_sqrt_derivatives(ccm_, mp, z)
                                                          : std::vector<Mat>{};
            Jacobians J0;
            if (derivs) J0 = eval_jacobians(sys_, z, v, th, d0);
            const Mat Gz = p > 0 ? sys_.G(z, v) : Mat(n, 0);
            const Mat Ez = sys_.q > 0 ? sys_.E(z) : Mat(n, 0);
            for (const auto& th_i : thetas_)
                for (const auto& d_j : ds_) {
                    const MismatchTerm t = mismatch(sys_, mp, dR, &J0, z, v, th_i, d_j, th, Gz, Ez, derivs);
                    const Vec dth = th_i - th;
                    for (const auto& sg : signs_) {
                        const Vec lg = p > 0 ? Vec(sg.cwiseProduct(consts_.L_G)) : Vec(0);
                        const double gain = p > 0 ? lg.dot(dth) : 0.0;
                        e.cin(row) = gain * dk + t.value + lam * eta - x(L.w_bar(k));
                        if (derivs) {
                            e.Jin.block(row, L.z(k), 1, n) = t.gz.transpose();
                            e.Jin.block(row, L.v(k), 1, m) = t.gv.transpose();
                            if (p > 0) e.Jin.block(row, L.theta(), 1, p) = (t.gth - lg * dk).transpose();
                            e.Jin(row, L.delta(k)) = gain;
                            e.Jin(row, L.w_bar(k)) = -1.0;
                        }
                        ++row;
                    }
                }
        }
    }
    // tightened constraints at the sampling times
    for (int k = 0; k < N; ++k) {
        const Vec z = zk(k), v = vk(k);
        const double dk = x(L.delta(k));
        for (int j = 0; j < r; ++j, ++row) {
            const auto& h = sys_.constraints[static_cast<std::size_t>(j)];
            e.cin(row) = h.value(z, v) + consts_.c(j) * dk;
            if (derivs) {
                const auto [gx, gu] = h.gradient(z, v);
                e.Jin.block(row, L.z(k), 1, n) = gx.transpose();
                e.Jin.block(row, L.v(k), 1, m) = gu.transpose();
                e.Jin(row, L.delta(k)) = consts_.c(j);
            }
        }
    }
    if (!theta_box_) {
        const int nr = Theta0_rows_.num_rows();
        e.cin.segment(row, nr) = Theta0_rows_.A * th - Theta0_rows_.b;
        if (derivs) e.Jin.block(row, L.theta(), nr, p) = Theta0_rows_.A;
        row += nr;
    }
    // initial condition through the embedded geodesic
    {
        Mat P(n, D + 1);
        P.col(0) = zk(0);
        if (D > 1) P.middleCols(1, D - 1) = Eigen::Map<const Mat>(x.data() + L.geo(), n, D - 1);
        P.col(D) = x_t_;
        Mat G;
        const double E = discrete_energy(ccm_, basis_, P, derivs ? &G : nullptr);
        const double d0v = x(L.delta(0));
        // with a floor the row sqrt(E + eta^2) <= delta_0 keeps a unit slope in
        // delta_0 when z_0 = x_t, where E - delta_0^2 has a vanishing gradient
        double gscale = 1.0;
        if (eta > 0.0) {
            const double sE = std::sqrt(std::max(E, 0.0) + eta * eta);
            e.cin(row) = sE - d0v;
            gscale = 0.5 / sE;
        } else {
            e.cin(row) = E - d0v * d0v;
        }
        if (derivs) {
            e.Jin.block(row, L.z(0), 1, n) = gscale * G.col(0).transpose();
            for (int c = 1; c < D; ++c)
                e.Jin.block(row, L.geo() + (c - 1) * n, 1, n) = gscale * G.col(c).transpose();
            e.Jin(row, L.delta(0)) = eta > 0.0 ? -1.0 : -2.0 * d0v;
        }
        ++row;
    }
    // terminal ingredients
    const double df = x(L.delta_f());
    if (!cfg_.rigid) {
        e.cin(row) = x(L.delta(N)) - df;
        if (derivs) {
            e.Jin(row, L.delta(N)) = 1.0;
            e.Jin(row, L.delta_f()) = -1.0;
        }
        ++row;
        if (n_vertex_rows_ > 0) {
            const MetricPoint mp = eval_metric_point(ccm_, ref.z);
            const std::vector<Mat> dR = (derivs && !flat) ? eval_metric_sqrt_derivatives(ccm_, mp, ref.z)
                                                          : std::vector<Mat>{};
            Jacobians J0;
            if (derivs) J0 = eval_jacobians(sys_, ref.z, ref.v, th, d0);
            const Mat Gz = p > 0 ? sys_.G(ref.z, ref.v) : Mat(n, 0);
            const Mat Ez = sys_.q > 0 ? sys_.E(ref.z) : Mat(n, 0);
            for (const auto& th_i : thetas_)
                for (const auto& d_j : ds_) {
                    const MismatchTerm t =
                        mismatch(sys_, mp, dR, &J0, ref.z, ref.v, th_i, d_j, th, Gz, Ez, derivs);
                    const Vec dth = th_i - th;
                    for (const auto& sg : signs_) {
                        const Vec lg = p > 0 ? Vec(sg.cwiseProduct(consts_.L_G)) : Vec(0);
                        const double gain = p > 0 ? lg.dot(dth) : 0.0;
                        e.cin(row) = (gain - lam) * df + t.value + lam * eta;
                        if (derivs) {
                            if (p > 0)
                                e.Jin.block(row, L.theta(), 1, p) =
                                    (ref.dz.transpose() * t.gz + ref.dv.transpose() * t.gv + t.gth - lg * df)
                                        .transpose();
                            e.Jin(row, L.delta_f()) = gain - lam;
                        }
                        ++row;
                    }
                }
        }
    }
    for (int j = 0; j < r; ++j, ++row) {
        const auto& h = sys_.constraints[static_cast<std::size_t>(j)];
        e.cin(row) = h.value(ref.z, ref.v) + consts_.c(j) * df;
        if (derivs) {
            const auto [gx, gu] = h.gradient(ref.z, ref.v);
            if (p > 0)
                e.Jin.block(row, L.theta(), 1, p) = (ref.dz.transpose() * gx + ref.dv.transpose() * gu).transpose();
            e.Jin(row, L.delta_f()) = consts_.c(j);
        }
    }
    require(row == nlp_.n_in, "OCP: inequality row count mismatch");
    cache_ = std::move(e);
    return *cache_;
}

double OCP::objective(const Vec& x, Vec* grad) const
{
    const Eval& e = evaluate(x, grad != nullptr);
    if (grad) *grad = e.grad;
    return e.f;
}

void OCP::eq(const Vec& x, Vec& c, Mat* J) const
{
    const Eval& e = evaluate(x, J != nullptr);
    c = e.ceq;
    if (J) *J = e.Jeq;
}

void OCP::ineq(const Vec& x, Vec& c, Mat* J) const
{
    const Eval& e = evaluate(x, J != nullptr);
    c = e.cin;
    if (J) *J = e.Jin;
}

Vec OCP::stage_costs(const Vec& x) const
{
    return evaluate(x, false).stage;
}

std::vector<std::string> OCP::eq_labels() const
{
    std::vector<std::string> out;
    const int N = lay_.N, n = lay_.n;
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < n; ++i) out.push_back("dynamics[" + std::to_string(k) + "][" + std::to_string(i) + "]");
    if (!cfg_.rigid)
        for (int k = 0; k < N; ++k) out.push_back("tube_dynamics[" + std::to_string(k) + "]");
    for (int i = 0; i < n; ++i) out.push_back("terminal_state[" + std::to_string(i) + "]");
    return out;
}

std::vector<std::string> OCP::in_labels() const
{
    std::vector<std::string> out;
    const int N = lay_.N;
    auto vertex_label = [&](const std::string& base) {
        for (std::size_t i = 0; i < thetas_.size(); ++i)
            for (std::size_t j = 0; j < ds_.size(); ++j)
                for (std::size_t s = 0; s < signs_.size(); ++s)
                    out.push_back(base + "[" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(s) +
                                  "]");
    };
    if (n_vertex_rows_ > 0)
        for (int k = 0; k < N; ++k) vertex_label("w_bar[" + std::to_string(k) + "]");
    for (int k = 0; k < N; ++k)
        for (const auto& h : sys_.constraints) out.push_back("tightened[" + std::to_string(k) + "][" + h.name + "]");
    if (!theta_box_)
        for (int i = 0; i < Theta0_rows_.num_rows(); ++i) out.push_back("theta0[" + std::to_string(i) + "]");
    out.push_back("initial_geodesic");
    if (!cfg_.rigid) {
        out.push_back("terminal_delta");
        if (n_vertex_rows_ > 0) vertex_label("terminal_f_delta");
    }
    for (const auto& h : sys_.constraints) out.push_back("terminal_tightened[" + h.name + "]");
    return out;
}

OCPCheck OCP::check(const Vec& x) const
{
    OCPCheck c;
    const Eval& e = evaluate(x, false);
    const auto le = eq_labels();
    const auto li = in_labels();
    double worst = -1.0;
    for (Eigen::Index i = 0; i < e.ceq.size(); ++i) {
        const double v = std::abs(e.ceq(i));
        c.max_eq = std::max(c.max_eq, v);
        if (v > worst) {
            worst = v;
            c.worst = le[static_cast<std::size_t>(i)];
        }
    }
    for (Eigen::Index i = 0; i < e.cin.size(); ++i) {
        const double v = std::max(0.0, e.cin(i));
        c.max_in = std::max(c.max_in, v);
        if (v > worst) {
            worst = v;
            c.worst = li[static_cast<std::size_t>(i)];
        }
    }
    for (int i = 0; i < lay_.size(); ++i) {
        const double v = std::max({0.0, nlp_.lb(i) - x(i), x(i) - nlp_.ub(i)});
        c.max_bound = std::max(c.max_bound, v);
        if (v > worst) {
            worst = v;
            c.worst = "bound[" + std::to_string(i) + "]";
        }
    }
    return c;
}

Vec OCP::encode(const MPCSolution& s) const
{
    const auto& L = lay_;
    require(s.z.rows() == L.N + 1 && s.z.cols() == L.n, "OCP::encode: z has wrong shape");
    require(s.v.rows() == L.N && s.v.cols() == L.m, "OCP::encode: v has wrong shape");
    require(s.delta.size() == L.N + 1 && s.w_bar.size() == L.N, "OCP::encode: tube vectors have wrong length");
    require(s.theta_bar.size() == L.p, "OCP::encode: theta_bar has wrong length");
    require(s.geo.rows() == L.n && s.geo.cols() == L.D - 1, "OCP::encode: geodesic block has wrong shape");
    Vec x(L.size());
    for (int k = 0; k <= L.N; ++k) x.segment(L.z(k), L.n) = s.z.row(k).transpose();
    for (int k = 0; k < L.N; ++k) x.segment(L.v(k), L.m) = s.v.row(k).transpose();
    x.segment(L.delta(0), L.N + 1) = s.delta;
    x.segment(L.theta(), L.p) = s.theta_bar;
    x(L.delta_f()) = s.delta_f_bar;
    x.segment(L.w_bar(0), L.N) = s.w_bar;
    if (L.D > 1) x.segment(L.geo(), L.n * (L.D - 1)) = Eigen::Map<const Vec>(s.geo.data(), L.n * (L.D - 1));
    return x;
}

MPCSolution OCP::decode(const Vec& x) const
{
    const auto& L = lay_;
    require_size(x.size(), L.size(), "OCP::decode");
    MPCSolution s;
    s.z.resize(L.N + 1, L.n);
    s.v.resize(L.N, L.m);
    for (int k = 0; k <= L.N; ++k) s.z.row(k) = x.segment(L.z(k), L.n).transpose();
    for (int k = 0; k < L.N; ++k) s.v.row(k) = x.segment(L.v(k), L.m).transpose();
    s.delta = x.segment(L.delta(0), L.N + 1);
    s.theta_bar = x.segment(L.theta(), L.p);
    s.delta_f_bar = x(L.delta_f());
    s.w_bar = x.segment(L.w_bar(0), L.N);
    s.geo = L.D > 1 ? Mat(Eigen::Map<const Mat>(x.data() + L.geo(), L.n, L.D - 1)) : Mat(L.n, 0);
    s.stage_cost = stage_costs(x);
    s.cost = s.stage_cost.sum();

    const int sub = cfg_.substeps;
    const double h = cfg_.Ts / sub;
    s.z_fine.resize(L.N * sub + 1, L.n);
    for (int k = 0; k < L.N; ++k) {
        Vec z = s.z.row(k).transpose();
        const Vec v = s.v.row(k).transpose();
        s.z_fine.row(k * sub) = z.transpose();
        for (int j = 1; j <= sub; ++j) {
            const Vec k1 = eval_nominal(sys_, z, v, s.theta_bar);
            const Vec k2 = eval_nominal(sys_, z + 0.5 * h * k1, v, s.theta_bar);
            const Vec k3 = eval_nominal(sys_, z + 0.5 * h * k2, v, s.theta_bar);
            const Vec k4 = eval_nominal(sys_, z + h * k3, v, s.theta_bar);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (j < sub) s.z_fine.row(k * sub + j) = z.transpose();
        }
    }
    s.z_fine.row(L.N * sub) = s.z.row(L.N);
    const OCPCheck c = check(x);
    s.violation = std::max({c.max_eq, c.max_in, c.max_bound});
    return s;
}

Vec OCP::initial_guess(const std::vector<Vec>& waypoints, const std::vector<int>& pos_idx_in) const
{
    require(waypoints.empty() || !pos_idx_in.empty(), "initial_guess: waypoints need position indices");
    const std::vector<int>& pos_idx = pos_idx_in.empty() ? cfg_.position_idx : pos_idx_in;
    const auto& L = lay_;
    const int n = L.n, m = L.m, p = L.p, N = L.N;
    Vec th(p);
    if (p > 0) {
        if (cfg_.rigid) {
            th = nlp_.lb.segment(L.theta(), p);
        } else {
            const auto [lo, hi] = bounding_box(sys_.Theta0);
            th = 0.5 * (lo + hi);
        }
    }
    const ReferencePoint ref = reference_point(term_.reference, th);
    const Vec u_lo = sys_.sample_lo.tail(m), u_hi = sys_.sample_hi.tail(m);

    // piecewise-linear target in the position coordinates, ending at the reference
    std::vector<Vec> path;
    if (!pos_idx.empty()) {
        Vec start(pos_idx.size()), goal(pos_idx.size());
        for (std::size_t i = 0; i < pos_idx.size(); ++i) {
            start(static_cast<Eigen::Index>(i)) = x_t_(pos_idx[i]);
            goal(static_cast<Eigen::Index>(i)) = ref.z(pos_idx[i]);
        }
        path.push_back(start);
        for (const auto& w : waypoints) {
            require_size(w.size(), static_cast<Eigen::Index>(pos_idx.size()), "initial_guess: waypoint");
            path.push_back(w);
        }
        path.push_back(goal);
    }
    std::vector<double> cum{0.0};
    for (std::size_t i = 1; i < path.size(); ++i) cum.push_back(cum.back() + (path[i] - path[i - 1]).norm());
    auto target = [&](int k) {
        Vec t = ref.z;
        if (path.empty() || cum.back() == 0.0) return t;
        const double s = std::min(1.0, (k + 1.0) / (0.8 * N)) * cum.back();
        std::size_t seg = 1;
        while (seg + 1 < path.size() && cum[seg] < s) ++seg;
        const double len = cum[seg] - cum[seg - 1];
        const double a = len > 0.0 ? (s - cum[seg - 1]) / len : 1.0;
        const Vec pos = path[seg - 1] + std::clamp(a, 0.0, 1.0) * (path[seg] - path[seg - 1]);
        for (std::size_t i = 0; i < pos_idx.size(); ++i) t(pos_idx[i]) = pos(static_cast<Eigen::Index>(i));
        return t;
    };

    // continuous-time feedback rollout on a fine grid; shooting nodes take the
    // states at the sampling times and v the interval averages (small defects)
    MPCSolution s;
    s.z.resize(N + 1, n);
    s.v.resize(N, m);
    s.theta_bar = th;
    Vec z = x_t_;
    const int fine = std::max(cfg_.substeps, static_cast<int>(std::ceil(cfg_.Ts / 0.01)));
    const double h = cfg_.Ts / fine;
    auto input = [&](const Vec& zz, int k) {
        Vec u = ref.v + eval_feedback_gain(ccm_, zz) * (zz - target(k));
        return Vec(u.cwiseMax(u_lo).cwiseMin(u_hi));
    };
    for (int k = 0; k < N; ++k) {
        s.z.row(k) = z.transpose();
        Vec vsum = Vec::Zero(m);
        for (int j = 0; j < fine; ++j) {
            const Vec u = input(z, k);
            vsum += u;
            const Vec k1 = eval_nominal(sys_, z, u, th);
            const Vec k2 = eval_nominal(sys_, z + 0.5 * h * k1, u, th);
            const Vec k3 = eval_nominal(sys_, z + 0.5 * h * k2, u, th);
            const Vec k4 = eval_nominal(sys_, z + h * k3, u, th);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            z = z.cwiseMax(sys_.sample_lo.head(n)).cwiseMin(sys_.sample_hi.head(n));
        }
        s.v.row(k) = (vsum / fine).transpose();
    }
    s.z.row(N) = z.transpose();
    s.geo = Mat(n, L.D - 1);
    for (int c = 1; c < L.D; ++c) s.geo.col(c - 1) = x_t_;
    s.delta = Vec::Zero(N + 1);
    s.w_bar = Vec::Constant(N, consts_.lambda() * cfg_.delta_floor);
    if (cfg_.rigid) {
        s.delta.setConstant(rigid_delta_);
        s.w_bar.setConstant(consts_.lambda() * rigid_delta_);
        s.delta_f_bar = rigid_delta_;
        return encode(s);
    }
    s.delta(0) = cfg_.delta_floor;
    for (int k = 0; k < N; ++k) {
        if (uncertain_) {
            s.w_bar(k) = max_w_bar_requirement(consts_, ccm_, sys_, s.delta(k), s.z.row(k).transpose(),
                                               s.v.row(k).transpose(), Theta_, th) +
                         consts_.lambda() * cfg_.delta_floor;
        }
        s.delta(k + 1) = a_ * s.delta(k) + b_ * s.w_bar(k);
    }
    double df = s.delta(N);
    if (uncertain_) {
        // smallest delta_f with f_delta(delta_f, z_ref, v_ref) <= 0
        const double w0 = max_w_bar_requirement(consts_, ccm_, sys_, 0.0, ref.z, ref.v, Theta_, th) +
                          consts_.lambda() * cfg_.delta_floor;
        const double w1 = max_w_bar_requirement(consts_, ccm_, sys_, 1.0, ref.z, ref.v, Theta_, th) +
                          consts_.lambda() * cfg_.delta_floor;
        const double denom = consts_.lambda() - (w1 - w0);
        if (denom > 0.0) df = std::max(df, w0 / denom);
    }
    s.delta_f_bar = df;
    return encode(s);
}

double rigid_tube_delta(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts, const Polytope& Theta,
                        const Vec& theta_bar, double eta)
{
    const double d = rigid_tube_scaling(sys, ccm, consts, Theta, theta_bar, generate_samples(sys, {}));
    return d + rigid_floor_margin(consts, vertices_or_origin(Theta, sys.p), theta_bar, eta);
}

std::shared_ptr<OCP> build_ocp(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts,
                               const Vec& x_t, const Polytope& Theta_t, const MPCConfig& cfg,
                               const TerminalSpec& terminal)
{
    return std::make_shared<OCP>(sys, ccm, consts, x_t, Theta_t, cfg, terminal);
}

MPCSolution solve_ocp(const OCP& ocp, const std::optional<MPCSolution>& warm)
{
    NLPProblem nlp = ocp.nlp();
    SQPOptions opts = ocp.config().solver;
    // the quasi-Newton matrix of a shifted warm start does not line up with the
    // new variables, so only the point is reused
    if (warm) nlp.x0 = ocp.encode(*warm);
    const SQPResult res = solve_sqp(nlp, opts);
    MPCSolution s = ocp.decode(res.x);
    s.status = res.status;
    s.iterations = res.iterations;
    s.H = res.H;
    return s;
}

MPCSolution solve_ocp_multistart(const OCP& ocp, const std::vector<std::vector<Vec>>& paths,
                                 const std::vector<int>& pos_idx)
{
    const double tol = ocp.config().solver.feas_tol;
    std::optional<MPCSolution> best;
    auto consider = [&](MPCSolution s) {
        const bool ok = s.status == SolveStatus::Converged && s.feasible(tol * 10.0);
        const bool best_ok = best && best->status == SolveStatus::Converged && best->feasible(tol * 10.0);
        if (!best || (ok && (!best_ok || s.cost < best->cost)) || (!ok && !best_ok && s.violation < best->violation))
            best = std::move(s);
    };
    consider(solve_ocp(ocp));
    for (const auto& path : paths) {
        MPCSolution guess = ocp.decode(ocp.initial_guess(path, pos_idx));
        consider(solve_ocp(ocp, guess));
    }
    return *best;
}

MPCSolution shift_candidate(const OCP& next, const MPCSolution& prev)
{
    const auto& L = next.layout();
    const auto& sys = next.sys();
    const int n = L.n, m = L.m, N = L.N;
    require(prev.z.rows() == N + 1 && prev.v.rows() == N, "shift_candidate: horizon mismatch");
    MPCSolution s;
    s.theta_bar = prev.theta_bar;
    s.delta_f_bar = prev.delta_f_bar;
    const ReferencePoint ref = reference_point(next.terminal().reference, s.theta_bar);
    s.z.resize(N + 1, n);
    s.v.resize(N, m);
    s.z.topRows(N) = prev.z.bottomRows(N);
    if (N > 1) s.v.topRows(N - 1) = prev.v.bottomRows(N - 1);
    s.v.row(N - 1) = ref.v.transpose();
    {
        Vec z = s.z.row(N - 1).transpose();
        const double h = next.config().Ts / next.config().substeps;
        for (int j = 0; j < next.config().substeps; ++j) {
            const Vec k1 = eval_nominal(sys, z, ref.v, s.theta_bar);
            const Vec k2 = eval_nominal(sys, z + 0.5 * h * k1, ref.v, s.theta_bar);
            const Vec k3 = eval_nominal(sys, z + 0.5 * h * k2, ref.v, s.theta_bar);
            const Vec k4 = eval_nominal(sys, z + h * k3, ref.v, s.theta_bar);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        s.z.row(N) = z.transpose();
    }
    const Mat* warm = prev.geo.cols() == L.D - 1 ? &prev.geo : nullptr;
    const GeodesicCurve curve = solve_geodesic(next.ccm(), next.basis(), next.x_t(), s.z.row(0).transpose(),
                                               next.config().geodesic, warm);
    s.geo = L.D > 1 ? Mat(curve.values.middleCols(1, L.D - 1)) : Mat(n, 0);

    s.delta = Vec::Zero(N + 1);
    s.w_bar = Vec::Zero(N);
    if (next.config().rigid) {
        s.delta.setConstant(next.rigid_delta());
        s.w_bar.setConstant(next.consts().lambda() * next.rigid_delta());
    } else {
        const double eta = next.config().delta_floor;
        s.delta(0) = eta > 0.0 ? std::sqrt(curve.energy + eta * eta) : curve.length;
        const double floor_w = next.consts().lambda() * eta;
        for (int k = 0; k < N; ++k) {
            s.w_bar(k) = floor_w;
            if (next.uncertain())
                s.w_bar(k) += std::max(0.0, max_w_bar_requirement(next.consts(), next.ccm(), sys, s.delta(k),
                                                                  s.z.row(k).transpose(), s.v.row(k).transpose(),
                                                                  next.Theta(), s.theta_bar));
            s.delta(k + 1) = next.delta_a() * s.delta(k) + next.delta_b() * s.w_bar(k);
        }
    }
    const Vec x = next.encode(s);
    MPCSolution out = next.decode(x);
    out.status = SolveStatus::Converged;
    out.from_candidate = true;
    out.H = prev.H;
    return out;
}

TerminalCheck terminal_check(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts,
                             const TerminalSpec& terminal, const Vec& z, double delta, const Vec& theta_bar,
                             const Polytope& Theta, double delta_f_bar, double tol)
{
    TerminalCheck c;
    const ReferencePoint ref = reference_point(terminal.reference, theta_bar);
    c.state_residual = (z - ref.z).lpNorm<Eigen::Infinity>();
    c.delta_excess = delta - delta_f_bar;
    c.f_delta_value = f_delta(consts, ccm, sys, delta_f_bar, ref.z, ref.v, Theta, theta_bar);
    c.tightened = tightened_constraints(sys, consts, ref.z, ref.v, delta_f_bar);
    c.pass = c.state_residual <= tol && delta >= -tol && c.delta_excess <= tol && c.f_delta_value <= tol &&
             (c.tightened.size() == 0 || c.tightened.maxCoeff() <= tol);
    return c;
}

} // namespace rampc
