#include <doctest.h>

#include "rampc/estimation.hpp"
#include "rampc/polytope_ops.hpp"
#include "rampc/quadrotor.hpp"
#include "rampc/simulator.hpp"
#include "rampc/types.hpp"

#include <random>

using namespace rampc;

TEST_CASE("polytope: box vertices, support and bounding box")
{
    const Polytope P = Polytope::box((Vec(2) << -1, 0).finished(), (Vec(2) << 2, 3).finished());
    const auto V = vertices(P);
    CHECK(V.size() == 4);
    CHECK(support(P, (Vec(2) << 1, 1).finished()) == doctest::Approx(5.0));
    const auto [lo, hi] = bounding_box(P);
    CHECK(lo(0) == doctest::Approx(-1.0));
    CHECK(hi(1) == doctest::Approx(3.0));
    CHECK(P.contains((Vec(2) << 0, 1).finished()));
    CHECK_FALSE(P.contains((Vec(2) << 3, 1).finished()));
}

TEST_CASE("polytope: redundant rows are dropped")
{
    Polytope P = Polytope::interval(0.0, 1.0);
    P = intersect(P, Polytope::interval(-5.0, 5.0));
    const Polytope R = remove_redundant(P);
    CHECK(R.num_rows() == 2);
    CHECK(is_empty(intersect(Polytope::interval(0, 1), Polytope::interval(2, 3))));
}

TEST_CASE("estimation: eliminating a coordinate of a triangle gives its shadow")
{
    // y0 + y1 <= 1, y0 >= 0, y1 >= 0: projection onto y0 is [0, 1]
    Mat A(3, 2);
    A << 1, 1, -1, 0, 0, -1;
    const Polytope P(A, (Vec(3) << 1, 0, 0).finished());
    const auto [lo, hi] = bounding_box(eliminate_trailing(P, 1));
    CHECK(lo(0) == doctest::Approx(0.0));
    CHECK(hi(0) == doctest::Approx(1.0));
}

TEST_CASE("estimation: quadrotor sets keep the truth and shrink")
{
    QuadrotorParams qp;
    const UncertainSystem sys = quadrotor_model(qp);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const Vec th = Vec::Constant(1, 2.07);
    Polytope T = with_vertices(sys.Theta0);
    for (int k = 0; k < 30; ++k) {
        Vec x(6), u(2);
        for (int i = 0; i < 6; ++i) x(i) = 0.3 * U(rng);
        u << 2.4 + U(rng), 2.4 + U(rng);
        const Vec d = sample_uniform(sys.D, rng), e = sample_uniform(sys.D_eps, rng);
        const Polytope prev = T;
        T = update_parameter_set(T, {nonfalsified_set(sys, {0.0, x, u, measure_derivative(sys, x, u, th, d, e)})});
        CHECK(T.contains(th, 1e-9));
        CHECK(contained_in(T, prev, 1e-9));
    }
    CHECK(parameter_set_size(T) < parameter_set_size(sys.Theta0));
}

TEST_CASE("estimation: an inconsistent measurement throws")
{
    Polytope T = Polytope::interval(0.0, 1.0);
    CHECK_THROWS_AS(update_parameter_set(T, {Polytope::interval(2.0, 3.0)}), EstimationInconsistent);
}

TEST_CASE("estimation: fixed-complexity update on a box matches the interval bound")
{
    Mat H(2, 1);
    H << 1, -1;
    const Vec h = fixed_complexity_update(H, (Vec(2) << 1, 0).finished(), {Polytope::interval(0.25, 3.0)});
    CHECK(h(0) == doctest::Approx(1.0));
    CHECK(h(1) == doctest::Approx(-0.25));
}
