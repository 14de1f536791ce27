#include "rampc/polytope.hpp"
#include "rampc/polytope_ops.hpp"

namespace rampc {

Polytope::Polytope(Mat A_, Vec b_) : A(std::move(A_)), b(std::move(b_))
{
    require(A.rows() == b.size(), "Polytope: A and b row counts differ");
}

bool Polytope::contains(const Vec& x, double tol) const
{
    require_size(x.size(), dim(), "Polytope::contains");
    if (num_rows() == 0) return true;
    return ((A * x - b).array() <= tol).all();
}

Polytope Polytope::box(const Vec& lo, const Vec& hi)
{
    require(lo.size() == hi.size(), "Polytope::box: bound sizes differ");
    const auto n = lo.size();
    require(((hi - lo).array() >= 0.0).all(), "Polytope::box: lower bound exceeds upper bound");
    Mat A = Mat::Zero(2 * n, n);
    Vec b(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(2 * i, i) = 1.0;
        b(2 * i) = hi(i);
        A(2 * i + 1, i) = -1.0;
        b(2 * i + 1) = -lo(i);
    }
    return Polytope(std::move(A), std::move(b));
}

Polytope Polytope::interval(double lo, double hi)
{
    return box(Vec::Constant(1, lo), Vec::Constant(1, hi));
}

Polytope Polytope::point(const Vec& x)
{
    Polytope P = box(x, x);
    P.vertices = std::vector<Vec>{x};
    return P;
}

Polytope Polytope::whole_space(int dim)
{
    return Polytope(Mat::Zero(0, dim), Vec::Zero(0));
}

Polytope Polytope::empty(int dim)
{
    return Polytope(Mat::Zero(1, dim), Vec::Constant(1, -1.0));
}

bool Polytope::trivially_empty(double tol) const
{
    for (int i = 0; i < num_rows(); ++i) {
        if (A.row(i).cwiseAbs().maxCoeff() <= tol && b(i) < -tol) return true;
    }
    return false;
}

Polytope intersect(const Polytope& a, const Polytope& b)
{
    require(a.dim() == b.dim(), "intersect: dimension mismatch");
    Mat A(a.num_rows() + b.num_rows(), a.dim());
    Vec rhs(a.num_rows() + b.num_rows());
    A << a.A, b.A;
    rhs << a.b, b.b;
    return Polytope(std::move(A), std::move(rhs));
}

std::vector<Vec> vertex_list(const Polytope& P)
{
    if (P.vertices) return *P.vertices;
    return vertices(P);
}

Polytope with_vertices(Polytope P)
{
    if (!P.vertices) P.vertices = vertices(P);
    return P;
}

} // namespace rampc
