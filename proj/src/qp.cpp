#include "rampc/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Jacobi>

#include <cmath>
#include <limits>
#include <vector>

namespace rampc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Working factors: J^T N_active = [R; 0], J J^T = H^{-1}.
struct Factors {
    Mat J;
    Mat R;
    int q = 0;
    double R_norm = 1.0;

    // Rotate columns (a, b) of J so that d(b) becomes zero.
    void rotate_J(Vec& d, int a, int b)
    {
        const double h = std::hypot(d(a), d(b));
        if (h == 0.0) return;
        const double c = d(a) / h, s = d(b) / h;
        d(a) = h;
        d(b) = 0.0;
        // new col a = c ja + s jb, new col b = -s ja + c jb
        J.applyOnTheRight(a, b, Eigen::JacobiRotation<double>(c, -s));
    }

    bool add(Vec d)
    {
        const auto n = J.rows();
        for (Eigen::Index j = n - 1; j >= q + 1; --j) rotate_J(d, static_cast<int>(j - 1), static_cast<int>(j));
        if (std::abs(d(q)) <= 1e-12 * R_norm) return false;
        R.col(q).head(q + 1) = d.head(q + 1);
        R_norm = std::max(R_norm, std::abs(d(q)));
        ++q;
        return true;
    }

    void remove(int pos)
    {
        for (int i = pos; i < q - 1; ++i) R.col(i) = R.col(i + 1);
        R.col(q - 1).setZero();
        --q;
        for (int j = pos; j < q; ++j) {
            const double a = R(j, j), b = R(j + 1, j);
            const double h = std::hypot(a, b);
            if (h == 0.0) continue;
            const double c = a / h, s = b / h;
            for (int k = j; k < q; ++k) {
                const double t1 = R(j, k), t2 = R(j + 1, k);
                R(j, k) = c * t1 + s * t2;
                R(j + 1, k) = -s * t1 + c * t2;
            }
            R(j + 1, j) = 0.0;
            J.applyOnTheRight(j, j + 1, Eigen::JacobiRotation<double>(c, -s));
        }
    }
};

} // namespace

QPResult solve_qp(const Mat& H, const Vec& g, const Mat& A_eq, const Vec& b_eq, const Mat& A_in, const Vec& b_in,
                  int max_iter)
{
    const auto n = H.rows();
    require(H.cols() == n && g.size() == n, "solve_qp: H/g dimension mismatch");
    require(A_eq.rows() == b_eq.size() && (A_eq.rows() == 0 || A_eq.cols() == n), "solve_qp: equality shape");
    require(A_in.rows() == b_in.size() && (A_in.rows() == 0 || A_in.cols() == n), "solve_qp: inequality shape");
    const auto meq = A_eq.rows();
    const auto mi = A_in.rows();
    if (max_iter < 0) max_iter = static_cast<int>(10 * (n + meq + mi) + 100);

    QPResult res;
    Eigen::LLT<Mat> llt(H);
    if (llt.info() != Eigen::Success) {
        res.status = QPStatus::NotConvex;
        return res;
    }
    // constraints in the form n_i^T x >= b_i (inequality) or = b_i (equality)
    auto normal = [&](Eigen::Index c) -> Vec {
        return c < meq ? Vec(A_eq.row(c).transpose()) : Vec(-A_in.row(c - meq).transpose());
    };
    auto rhs = [&](Eigen::Index c) { return c < meq ? b_eq(c) : -b_in(c - meq); };

    Factors F;
    F.J = llt.matrixU().solve(Mat::Identity(n, n)); // J = L^{-T}
    F.R = Mat::Zero(n, n);
    Vec x = -llt.solve(g);
    std::vector<Eigen::Index> active;
    std::vector<double> u;

    auto directions = [&](const Vec& np, Vec& z, Vec& r) {
        const Vec d = F.J.transpose() * np;
        z = F.J.rightCols(n - F.q) * d.tail(n - F.q);
        r = F.q > 0 ? Vec(F.R.topLeftCorner(F.q, F.q).triangularView<Eigen::Upper>().solve(d.head(F.q))) : Vec(0);
        return d;
    };

    const double b_scale = 1.0 + std::max(b_eq.size() ? b_eq.cwiseAbs().maxCoeff() : 0.0,
                                          b_in.size() ? b_in.cwiseAbs().maxCoeff() : 0.0);
    const double feas_tol = 1e-11 * b_scale;

    // equality constraints first
    for (Eigen::Index c = 0; c < meq; ++c) {
        const Vec np = normal(c);
        Vec z, r;
        const Vec d = directions(np, z, r);
        const double s = np.dot(x) - rhs(c);
        const double zn = z.dot(np);
        double t = 0.0;
        if (std::abs(zn) > 1e-14 * std::max(1.0, np.squaredNorm())) t = -s / zn;
        else if (std::abs(s) > feas_tol) {
            res.status = QPStatus::Infeasible;
            return res;
        }
        x += t * z;
        for (int k = 0; k < F.q; ++k) u[static_cast<std::size_t>(k)] -= t * r(k);
        if (!F.add(d)) {
            // linearly dependent equality: consistent only if already satisfied
            if (std::abs(np.dot(x) - rhs(c)) > 1e-8 * b_scale) {
                res.status = QPStatus::Infeasible;
                return res;
            }
            continue;
        }
        active.push_back(c);
        u.push_back(t);
    }
    const int q_eq = F.q;

    const Vec row_scale = mi > 0 ? Vec(A_in.rowwise().norm().cwiseMax(1.0)) : Vec(0);
    int iter = 0;
    while (true) {
        // most violated inequality
        Eigen::Index p = -1;
        double worst = -feas_tol;
        const Vec slack = mi > 0 ? Vec(b_in - A_in * x) : Vec(0);
        for (Eigen::Index i = 0; i < mi; ++i) {
            const double sc = slack(i) / row_scale(i);
            if (sc < worst) {
                worst = sc;
                p = meq + i;
            }
        }
        if (p < 0) break;
        if (++iter > max_iter) {
            res.status = QPStatus::MaxIterations;
            res.x = x;
            res.iterations = iter;
            return res;
        }
        const Vec np = normal(p);
        double up = 0.0;
        while (true) {
            if (++iter > max_iter) {
                res.status = QPStatus::MaxIterations;
                res.x = x;
                res.iterations = iter;
                return res;
            }
            Vec z, r;
            const Vec d = directions(np, z, r);
            double t1 = kInf;
            int l = -1;
            for (int k = q_eq; k < F.q; ++k) {
                if (r(k) > 1e-14 && u[static_cast<std::size_t>(k)] / r(k) < t1) {
                    t1 = u[static_cast<std::size_t>(k)] / r(k);
                    l = k;
                }
            }
            const double zn = z.dot(np);
            const double s = np.dot(x) - rhs(p);
            const double t2 = std::abs(zn) > 1e-14 * std::max(1.0, np.squaredNorm()) ? -s / zn : kInf;
            const double t = std::min(t1, t2);
            if (t == kInf) {
                res.status = QPStatus::Infeasible;
                res.x = x;
                res.iterations = iter;
                return res;
            }
            if (t2 == kInf) {
                for (int k = 0; k < F.q; ++k) u[static_cast<std::size_t>(k)] -= t * r(k);
                up += t;
                active.erase(active.begin() + l);
                u.erase(u.begin() + l);
                F.remove(l);
                continue;
            }
            x += t * z;
            for (int k = 0; k < F.q; ++k) u[static_cast<std::size_t>(k)] -= t * r(k);
            up += t;
            if (t == t2) {
                if (!F.add(d)) {
                    res.status = QPStatus::Infeasible;
                    res.x = x;
                    res.iterations = iter;
                    return res;
                }
                active.push_back(p);
                u.push_back(up);
                break;
            }
            active.erase(active.begin() + l);
            u.erase(u.begin() + l);
            F.remove(l);
        }
    }

    res.status = QPStatus::Optimal;
    res.x = x;
    res.iterations = iter;
    res.lambda_eq = Vec::Zero(meq);
    res.mu_in = Vec::Zero(mi);
    for (std::size_t k = 0; k < active.size(); ++k) {
        const auto c = active[k];
        if (c < meq) res.lambda_eq(c) = -u[k];
        else res.mu_in(c - meq) = std::max(0.0, u[k]);
    }
    res.objective = 0.5 * x.dot(H * x) + g.dot(x);
    return res;
}

} // namespace rampc
