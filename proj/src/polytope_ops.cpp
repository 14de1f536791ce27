#include "rampc/polytope_ops.hpp"
#include "rampc/lp.hpp"

#include <cmath>

namespace rampc {

namespace {

void combinations(int n, int k, int start, std::vector<int>& cur, const auto& visit)
{
    if (static_cast<int>(cur.size()) == k) {
        visit(cur);
        return;
    }
    for (int i = start; i <= n - (k - static_cast<int>(cur.size())); ++i) {
        cur.push_back(i);
        combinations(n, k, i + 1, cur, visit);
        cur.pop_back();
    }
}

} // namespace

bool is_empty(const Polytope& P, double tol)
{
    if (P.trivially_empty()) return true;
    return !lp_feasible(P.A, P.b, tol);
}

double support(const Polytope& P, const Vec& c)
{
    const LPResult r = lp_maximize(c, P.A, P.b);
    if (r.status == LPStatus::Unbounded) throw UnboundedPolytope("support: polytope is unbounded");
    if (r.status == LPStatus::Infeasible) throw EstimationInconsistent("support: polytope is empty");
    return r.objective;
}

std::pair<Vec, Vec> bounding_box(const Polytope& P)
{
    const int d = P.dim();
    Vec lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        Vec e = Vec::Zero(d);
        e(i) = 1.0;
        hi(i) = support(P, e);
        lo(i) = -support(P, -e);
    }
    return {lo, hi};
}

std::vector<Vec> vertices(const Polytope& P, double tol)
{
    const int d = P.dim();
    if (d > 3) throw Unsupported("vertices: only dimensions up to 3 are supported");
    if (d == 0) return {};
    if (is_empty(P, tol)) return {};
    for (int i = 0; i < d; ++i) {
        Vec e = Vec::Zero(d);
        e(i) = 1.0;
        for (double s : {1.0, -1.0}) {
            if (lp_maximize(s * e, P.A, P.b).status == LPStatus::Unbounded)
                throw UnboundedPolytope("vertices: polytope is unbounded");
        }
    }

    std::vector<Vec> out;
    std::vector<int> cur;
    const double scale = 1.0 + P.b.cwiseAbs().maxCoeff();
    combinations(P.num_rows(), d, 0, cur, [&](const std::vector<int>& rows) {
        Mat A(d, d);
        Vec b(d);
        for (int k = 0; k < d; ++k) {
            A.row(k) = P.A.row(rows[static_cast<std::size_t>(k)]);
            b(k) = P.b(rows[static_cast<std::size_t>(k)]);
        }
        Eigen::FullPivLU<Mat> lu(A);
        if (lu.rank() < d) return;
        const Vec x = lu.solve(b);
        if (!x.allFinite() || !P.contains(x, tol * scale)) return;
        for (const auto& v : out)
            if ((v - x).cwiseAbs().maxCoeff() <= tol * scale) return;
        out.push_back(x);
    });
    return out;
}

Polytope remove_redundant(const Polytope& P, double tol)
{
    const int d = P.dim();
    if (is_empty(P, tol)) return Polytope::empty(d);

    // normalise, drop zero rows (which are then trivially satisfied)
    std::vector<Eigen::Index> keep;
    Mat A = P.A;
    Vec b = P.b;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double nrm = A.row(i).norm();
        if (nrm <= 1e-14) continue;
        A.row(i) /= nrm;
        b(i) /= nrm;
        keep.push_back(i);
    }

    std::vector<bool> active(keep.size(), true);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        // maximise row k over the other active rows plus a relaxed copy of row k
        std::vector<Eigen::Index> rows;
        for (std::size_t j = 0; j < keep.size(); ++j)
            if (j != k && active[j]) rows.push_back(keep[j]);
        const Eigen::Index i = keep[k];
        Mat As(static_cast<Eigen::Index>(rows.size()) + 1, d);
        Vec bs(As.rows());
        for (std::size_t j = 0; j < rows.size(); ++j) {
            As.row(static_cast<Eigen::Index>(j)) = A.row(rows[j]);
            bs(static_cast<Eigen::Index>(j)) = b(rows[j]);
        }
        As.row(As.rows() - 1) = A.row(i);
        bs(As.rows() - 1) = b(i) + 1.0;
        const LPResult r = lp_maximize(A.row(i).transpose(), As, bs);
        if (r.status == LPStatus::Optimal && r.objective <= b(i) + tol) active[k] = false;
    }

    std::vector<Eigen::Index> final_rows;
    for (std::size_t k = 0; k < keep.size(); ++k)
        if (active[k]) final_rows.push_back(keep[k]);
    Mat Ao(static_cast<Eigen::Index>(final_rows.size()), d);
    Vec bo(Ao.rows());
    for (std::size_t j = 0; j < final_rows.size(); ++j) {
        Ao.row(static_cast<Eigen::Index>(j)) = A.row(final_rows[j]);
        bo(static_cast<Eigen::Index>(j)) = b(final_rows[j]);
    }
    return Polytope(std::move(Ao), std::move(bo));
}

bool contained_in(const Polytope& inner, const Polytope& outer, double tol)
{
    for (const auto& v : vertex_list(inner))
        if (!outer.contains(v, tol)) return false;
    return true;
}

} // namespace rampc
