#include "rampc/estimation.hpp"
#include "rampc/io.hpp"
#include "rampc/lp.hpp"
#include "rampc/polytope_ops.hpp"

#include <cmath>

namespace rampc {

Polytope eliminate_trailing(const Polytope& P, int count, double tol)
{
    require(count >= 0 && count <= P.dim(), "eliminate_trailing: bad coordinate count");
    Mat A = P.A;
    Vec b = P.b;
    for (int e = 0; e < count; ++e) {
        const Eigen::Index col = A.cols() - 1;
        std::vector<Eigen::Index> pos, neg, zero;
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            const double a = A(i, col);
            (a > tol ? pos : a < -tol ? neg : zero).push_back(i);
        }
        const auto rows = static_cast<Eigen::Index>(zero.size() + pos.size() * neg.size());
        Mat An(rows, col);
        Vec bn(rows);
        Eigen::Index r = 0;
        for (auto i : zero) {
            An.row(r) = A.row(i).head(col);
            bn(r++) = b(i);
        }
        for (auto i : pos) {
            for (auto k : neg) {
                const double ai = A(i, col), ak = -A(k, col);
                An.row(r) = ak * A.row(i).head(col) + ai * A.row(k).head(col);
                bn(r++) = ak * b(i) + ai * b(k);
            }
        }
        A = std::move(An);
        b = std::move(bn);
        // keep the intermediate row count in check
        if (A.rows() > 4 * (A.cols() + 1) && A.cols() > 0) {
            Polytope reduced = remove_redundant(Polytope(A, b));
            A = reduced.A;
            b = reduced.b;
        }
    }
    return Polytope(std::move(A), std::move(b));
}

Polytope nonfalsified_set(const UncertainSystem& sys, const Measurement& meas)
{
    require_size(meas.x.size(), sys.n, "nonfalsified_set: x");
    require_size(meas.u.size(), sys.m, "nonfalsified_set: u");
    require_size(meas.xdot_tilde.size(), sys.n, "nonfalsified_set: xdot_tilde");
    const int p = sys.p, q = sys.q;
    const Vec r = meas.xdot_tilde - sys.f(meas.x) - sys.B(meas.x) * meas.u;
    const Mat G = p > 0 ? sys.G(meas.x, meas.u) : Mat(Mat::Zero(sys.n, 0));
    const Mat E = q > 0 ? sys.E(meas.x) : Mat(Mat::Zero(sys.n, 0));

    // eps = r - G theta - E d in D_eps and d in D, over (theta, d)
    const Mat& He = sys.D_eps.A;
    const Vec& he = sys.D_eps.b;
    const Mat& Hd = sys.D.A;
    const Vec& hd = sys.D.b;
    Mat A = Mat::Zero(He.rows() + Hd.rows(), p + q);
    Vec b(He.rows() + Hd.rows());
    A.topLeftCorner(He.rows(), p) = -He * G;
    A.topRightCorner(He.rows(), q) = -He * E;
    b.head(He.rows()) = he - He * r;
    if (q > 0) A.bottomRightCorner(Hd.rows(), q) = Hd;
    b.tail(Hd.rows()) = hd;

    Polytope proj = eliminate_trailing(Polytope(A, b), q);
    // rows without theta dependence decide consistency on their own
    std::vector<Eigen::Index> keep;
    const double scale = 1.0 + r.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < proj.A.rows(); ++i) {
        if (p == 0 || proj.A.row(i).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
            if (proj.b(i) < -1e-12 * scale) return Polytope::empty(p);
            continue;
        }
        keep.push_back(i);
    }
    Mat Ak(static_cast<Eigen::Index>(keep.size()), p);
    Vec bk(Ak.rows());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        Ak.row(static_cast<Eigen::Index>(k)) = proj.A.row(keep[k]);
        bk(static_cast<Eigen::Index>(k)) = proj.b(keep[k]);
    }
    if (Ak.rows() == 0) return Polytope::whole_space(p);
    return remove_redundant(Polytope(Ak, bk));
}

Polytope update_parameter_set(const Polytope& Theta_prev, const std::vector<Polytope>& deltas)
{
    Polytope P = Theta_prev;
    P.vertices.reset();
    for (const auto& d : deltas) P = intersect(P, d);
    if (is_empty(P, 0.0)) throw EstimationInconsistent("parameter set became empty: data falsify the model");
    P = remove_redundant(P, 1e-12);
    if (P.dim() <= 3) P = with_vertices(P);
    return P;
}

Vec fixed_complexity_update(const Mat& H, const Vec& h_prev, const std::vector<Polytope>& deltas)
{
    Polytope P(H, h_prev);
    for (const auto& d : deltas) P = intersect(P, d);
    Vec h_new(H.rows());
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
        const LPResult r = lp_maximize(H.row(i).transpose(), P.A, P.b);
        if (r.status == LPStatus::Infeasible)
            throw EstimationInconsistent("fixed-complexity update: empty intersection");
        if (r.status == LPStatus::Unbounded) throw UnboundedPolytope("fixed-complexity update: unbounded");
        h_new(i) = std::min(r.objective, h_prev(i));
    }
    return h_new;
}

double parameter_set_size(const Polytope& Theta)
{
    const auto [lo, hi] = bounding_box(Theta);
    return (hi - lo).cwiseMax(0.0).prod();
}

void write_parameter_history(const std::string& path, const std::vector<double>& times,
                             const std::vector<Polytope>& history)
{
    require(times.size() == history.size(), "write_parameter_history: size mismatch");
    json j = json::array();
    for (std::size_t k = 0; k < history.size(); ++k) {
        json e = to_json(history[k]);
        e["t"] = times[k];
        if (history[k].dim() <= 3) {
            json verts = json::array();
            for (const auto& v : vertex_list(history[k])) verts.push_back(to_json(v));
            e["vertices"] = verts;
        }
        j.push_back(e);
    }
    write_json_file(path, j);
}

} // namespace rampc
