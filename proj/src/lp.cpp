#include "rampc/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace rampc {

namespace {

constexpr double kPivotTol = 1e-11;

class Tableau {
public:
    Tableau(Mat T, std::vector<int> basis) : T_(std::move(T)), basis_(std::move(basis)) {}

    Mat& table() { return T_; }
    std::vector<int>& basis() { return basis_; }
    Eigen::Index rows() const { return T_.rows() - 1; }
    Eigen::Index cols() const { return T_.cols() - 1; }

    void pivot(Eigen::Index p, Eigen::Index q)
    {
        T_.row(p) /= T_(p, q);
        for (Eigen::Index i = 0; i < T_.rows(); ++i) {
            if (i == p) continue;
            const double f = T_(i, q);
            if (f != 0.0) T_.row(i) -= f * T_.row(p);
        }
        basis_[static_cast<std::size_t>(p)] = static_cast<int>(q);
    }

    /// Runs the simplex on the objective row (last row, minimisation form) over
    /// columns [0, allowed_cols). Returns false when unbounded.
    bool run(Eigen::Index allowed_cols)
    {
        const Eigen::Index obj = rows();
        const Eigen::Index rhs = cols();
        const long max_iter = 100 * (rows() + cols() + 10);
        for (long it = 0; it < max_iter; ++it) {
            Eigen::Index q = -1;
            for (Eigen::Index j = 0; j < allowed_cols; ++j) {
                if (T_(obj, j) < -1e-10) {
                    q = j;
                    break;
                }
            }
            if (q < 0) return true;
            Eigen::Index p = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < obj; ++i) {
                if (T_(i, q) <= kPivotTol) continue;
                const double ratio = T_(i, rhs) / T_(i, q);
                if (ratio < best - 1e-14 ||
                    (std::abs(ratio - best) <= 1e-14 && p >= 0 &&
                     basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(p)])) {
                    best = ratio;
                    p = i;
                }
            }
            if (p < 0) return false;
            pivot(p, q);
        }
        return true;
    }

private:
    Mat T_;
    std::vector<int> basis_;
};

} // namespace

LPResult lp_maximize(const Vec& c, const Mat& A, const Vec& b)
{
    require(A.cols() == c.size() && A.rows() == b.size(), "lp_maximize: dimension mismatch");
    const Eigen::Index d = A.cols();
    const Eigen::Index r = A.rows();

    // columns: x+ (d), x- (d), slack (r), artificial (one per negative-rhs row)
    std::vector<Eigen::Index> art_rows;
    for (Eigen::Index i = 0; i < r; ++i)
        if (b(i) < 0.0) art_rows.push_back(i);
    const Eigen::Index n_art = static_cast<Eigen::Index>(art_rows.size());
    const Eigen::Index n_cols = 2 * d + r + n_art;

    Mat T = Mat::Zero(r + 1, n_cols + 1);
    std::vector<int> basis(static_cast<std::size_t>(r));
    Eigen::Index art = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
        const double sgn = b(i) < 0.0 ? -1.0 : 1.0;
        T.block(i, 0, 1, d) = sgn * A.row(i);
        T.block(i, d, 1, d) = -sgn * A.row(i);
        T(i, 2 * d + i) = sgn;
        T(i, n_cols) = sgn * b(i);
        if (sgn < 0.0) {
            const Eigen::Index col = 2 * d + r + art;
            T(i, col) = 1.0;
            basis[static_cast<std::size_t>(i)] = static_cast<int>(col);
            ++art;
        } else {
            basis[static_cast<std::size_t>(i)] = static_cast<int>(2 * d + i);
        }
    }

    Tableau tab(std::move(T), std::move(basis));
    LPResult res;
    res.x = Vec::Zero(d);

    if (n_art > 0) {
        Mat& t = tab.table();
        t.row(r).setZero();
        for (Eigen::Index k = 0; k < n_art; ++k) t(r, 2 * d + r + k) = 1.0;
        for (Eigen::Index i : art_rows) t.row(r) -= t.row(i);
        tab.run(n_cols);
        if (-t(r, n_cols) > 1e-9 * (1.0 + b.cwiseAbs().maxCoeff())) {
            res.status = LPStatus::Infeasible;
            return res;
        }
        // drive remaining artificials out of the basis where possible
        for (Eigen::Index i = 0; i < r; ++i) {
            if (tab.basis()[static_cast<std::size_t>(i)] < 2 * d + r) continue;
            for (Eigen::Index j = 0; j < 2 * d + r; ++j) {
                if (std::abs(t(i, j)) > 1e-9) {
                    tab.pivot(i, j);
                    break;
                }
            }
        }
    }

    Mat& t = tab.table();
    t.row(r).setZero();
    t.block(r, 0, 1, d) = -c.transpose();
    t.block(r, d, 1, d) = c.transpose();
    for (Eigen::Index i = 0; i < r; ++i) {
        const int bcol = tab.basis()[static_cast<std::size_t>(i)];
        const double f = t(r, bcol);
        if (f != 0.0) t.row(r) -= f * t.row(i);
    }
    if (!tab.run(2 * d + r)) {
        res.status = LPStatus::Unbounded;
        return res;
    }
    for (Eigen::Index i = 0; i < r; ++i) {
        const int bcol = tab.basis()[static_cast<std::size_t>(i)];
        if (bcol < d)
            res.x(bcol) += t(i, n_cols);
        else if (bcol < 2 * d)
            res.x(bcol - d) -= t(i, n_cols);
    }
    res.status = LPStatus::Optimal;
    res.objective = c.dot(res.x);
    return res;
}

bool lp_feasible(const Mat& A, const Vec& b, double tol)
{
    if (A.rows() == 0) return true;
    const Vec relaxed = b.array() + tol;
    return lp_maximize(Vec::Zero(A.cols()), A, relaxed).status != LPStatus::Infeasible;
}

} // namespace rampc
