#include <doctest.h>

#include "rampc/lp.hpp"
#include "rampc/qp.hpp"

#include <random>

using namespace rampc;

TEST_CASE("lp: box maximisation")
{
    Mat A(4, 2);
    A << 1, 0, -1, 0, 0, 1, 0, -1;
    Vec b(4);
    b << 2, 1, 3, -0.5;
    Vec c(2);
    c << 1, -1;
    const auto r = lp_maximize(c, A, b);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.objective == doctest::Approx(2.0 - 0.5));
    CHECK(r.x(0) == doctest::Approx(2.0));
    CHECK(r.x(1) == doctest::Approx(0.5));
}

TEST_CASE("lp: infeasible and unbounded")
{
    Mat A(2, 1);
    A << 1, -1;
    Vec b(2);
    b << 1, -2; // x <= 1, x >= 2
    CHECK(lp_maximize(Vec::Ones(1), A, b).status == LPStatus::Infeasible);
    Mat A2(1, 1);
    A2 << 1;
    CHECK(lp_maximize(-Vec::Ones(1), A2, Vec::Ones(1)).status == LPStatus::Unbounded);
    CHECK_FALSE(lp_feasible(A, b));
}

TEST_CASE("lp: random polytopes agree with vertex brute force")
{
    std::mt19937 rng(7);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int rows = 8;
        Mat A(rows, 2);
        Vec b(rows);
        for (int i = 0; i < rows; ++i) {
            const double ang = 2.0 * 3.14159265358979 * i / rows + 0.2 * N(rng);
            A(i, 0) = std::cos(ang);
            A(i, 1) = std::sin(ang);
            b(i) = 1.0 + 0.3 * std::abs(N(rng)) + A.row(i).dot(Vec::Constant(2, 0.5));
        }
        Vec c(2);
        c << N(rng), N(rng);
        double best = -1e300;
        for (int i = 0; i < rows; ++i)
            for (int j = i + 1; j < rows; ++j) {
                Mat S(2, 2);
                S << A.row(i), A.row(j);
                if (std::abs(S.determinant()) < 1e-12) continue;
                Vec bb(2);
                bb << b(i), b(j);
                const Vec v = S.fullPivLu().solve(bb);
                if (((A * v - b).array() <= 1e-9).all()) best = std::max(best, c.dot(v));
            }
        const auto r = lp_maximize(c, A, b);
        REQUIRE(r.status == LPStatus::Optimal);
        CHECK(r.objective == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("qp: equality-constrained subcase matches the KKT system")
{
    std::mt19937 rng(3);
    std::normal_distribution<double> N(0.0, 1.0);
    const int n = 8, me = 3;
    Mat L = Mat::NullaryExpr(n, n, [&] { return N(rng); });
    const Mat H = L * L.transpose() + Mat::Identity(n, n);
    const Vec g = Vec::NullaryExpr(n, [&] { return N(rng); });
    const Mat A = Mat::NullaryExpr(me, n, [&] { return N(rng); });
    const Vec b = Vec::NullaryExpr(me, [&] { return N(rng); });
    Mat K = Mat::Zero(n + me, n + me);
    K.topLeftCorner(n, n) = H;
    K.topRightCorner(n, me) = A.transpose();
    K.bottomLeftCorner(me, n) = A;
    Vec rhs(n + me);
    rhs << -g, b;
    const Vec sol = K.fullPivLu().solve(rhs);
    const auto r = solve_qp(H, g, A, b, Mat(0, n), Vec(0));
    REQUIRE(r.status == QPStatus::Optimal);
    CHECK((r.x - sol.head(n)).norm() < 1e-8);
    CHECK((r.lambda_eq - sol.tail(me)).norm() < 1e-8);
}

TEST_CASE("qp: inequality KKT conditions on random problems")
{
    std::mt19937 rng(11);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 10, me = 2, mi = 15;
        Mat L = Mat::NullaryExpr(n, n, [&] { return N(rng); });
        const Mat H = L * L.transpose() + 0.1 * Mat::Identity(n, n);
        const Vec g = Vec::NullaryExpr(n, [&] { return N(rng); });
        const Mat Ae = Mat::NullaryExpr(me, n, [&] { return N(rng); });
        const Vec x0 = Vec::NullaryExpr(n, [&] { return N(rng); });
        const Vec be = Ae * x0;
        const Mat Ai = Mat::NullaryExpr(mi, n, [&] { return N(rng); });
        const Vec bi = Ai * x0 + Vec::NullaryExpr(mi, [&] { return std::abs(N(rng)); });
        const auto r = solve_qp(H, g, Ae, be, Ai, bi);
        REQUIRE(r.status == QPStatus::Optimal);
        const Vec stat = H * r.x + g + Ae.transpose() * r.lambda_eq + Ai.transpose() * r.mu_in;
        CHECK(stat.norm() < 1e-8);
        CHECK((Ae * r.x - be).norm() < 1e-9);
        CHECK((Ai * r.x - bi).maxCoeff() < 1e-9);
        CHECK(r.mu_in.minCoeff() >= 0.0);
        CHECK(std::abs(r.mu_in.dot(Ai * r.x - bi)) < 1e-8);
    }
}

TEST_CASE("qp: infeasible constraints are reported")
{
    const Mat H = Mat::Identity(1, 1);
    Mat A(2, 1);
    A << 1, -1;
    Vec b(2);
    b << -1, -1; // x <= -1 and x >= 1
    CHECK(solve_qp(H, Vec::Zero(1), Mat(0, 1), Vec(0), A, b).status == QPStatus::Infeasible);
}
