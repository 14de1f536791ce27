#include <doctest.h>

#include "rampc/chebyshev.hpp"
#include "rampc/geodesic.hpp"
#include "rampc/io.hpp"

#include <cmath>
#include <random>

using namespace rampc;

namespace {

CCM load_quad() { return ccm_from_json(read_json_file(std::string(RAMPC_SOURCE_DIR) + "/data/quadrotor_ccm.json")); }

} // namespace

TEST_CASE("chebyshev: interpolation reproduces a cubic and its derivative")
{
    const ChebyshevBasis b(4);
    Vec vals(5);
    for (int i = 0; i <= 4; ++i) vals(i) = std::pow(b.nodes(i), 3) - b.nodes(i);
    Vec phi, dphi;
    b.eval(0.37, phi, dphi);
    CHECK(phi.dot(vals) == doctest::Approx(std::pow(0.37, 3) - 0.37).epsilon(1e-12));
    CHECK(dphi.dot(vals) == doctest::Approx(3 * 0.37 * 0.37 - 1.0).epsilon(1e-12));
}

TEST_CASE("chebyshev: Clenshaw-Curtis integrates polynomials exactly")
{
    Vec s, w;
    clenshaw_curtis(9, s, w);
    double I = 0.0;
    for (int i = 0; i < s.size(); ++i) I += w(i) * std::pow(s(i), 6);
    CHECK(I == doctest::Approx(1.0 / 7.0).epsilon(1e-13));
}

TEST_CASE("geodesic: constant metric gives the straight line")
{
    const Mat W = (Mat(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
    const CCM ccm = CCM::constant(W, Mat::Zero(1, 2), 1.0);
    const Vec x = (Vec(2) << 1.0, -2.0).finished(), z = (Vec(2) << -0.5, 0.3).finished();
    const GeodesicCurve c = solve_geodesic(ccm, x, z, {});
    CHECK(c.converged);
    const Vec e = x - z;
    CHECK(c.length == doctest::Approx(std::sqrt(e.dot(W.inverse() * e))).epsilon(1e-10));
    for (int i = 0; i <= c.degree; ++i) {
        const Vec on_line = z + c.nodes(i) * e;
        CHECK((c.values.col(i) - on_line).norm() < 1e-7);
    }
}

TEST_CASE("geodesic: feedback on a constant metric is v + K (x - z)")
{
    const Mat W = (Mat(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
    const Mat Y = (Mat(1, 2) << -0.3, -1.1).finished();
    const CCM ccm = CCM::constant(W, Y, 1.0);
    const Vec x = (Vec(2) << 0.4, -0.2).finished(), z = (Vec(2) << -0.1, 0.6).finished();
    const Vec v = Vec::Constant(1, 0.7);
    const Vec k = feedback_kappa(ccm, x, z, v);
    CHECK(k(0) == doctest::Approx(v(0) + (Y * W.inverse() * (x - z))(0)).epsilon(1e-10));
}

TEST_CASE("geodesic: discrete energy gradient matches central differences")
{
    const CCM ccm = load_quad();
    const ChebyshevBasis b(4);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    Mat P(6, 5);
    for (int i = 0; i < P.size(); ++i) P(i) = U(rng);
    Mat g;
    discrete_energy(ccm, b, P, &g);
    double worst = 0.0;
    for (int i = 0; i < P.size(); ++i) {
        Mat Pp = P, Pm = P;
        const double h = 1e-6;
        Pp(i) += h;
        Pm(i) -= h;
        const double fd = (discrete_energy(ccm, b, Pp) - discrete_energy(ccm, b, Pm)) / (2 * h);
        worst = std::max(worst, std::abs(fd - g(i)) / std::max(1.0, std::abs(fd)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("geodesic: quadrotor metric solves are symmetric and vanish on the diagonal")
{
    const CCM ccm = load_quad();
    GeodesicOptions o;
    o.degree = 8;
    const Vec x = (Vec(6) << 0.5, -0.3, 0.2, 0.4, -0.1, 0.6).finished();
    const Vec z = (Vec(6) << -0.2, 0.4, -0.1, 0.0, 0.3, -0.5).finished();
    const GeodesicCurve a = solve_geodesic(ccm, x, z, o), b = solve_geodesic(ccm, z, x, o);
    CHECK(a.converged);
    CHECK(a.length == doctest::Approx(b.length).epsilon(1e-7));
    CHECK(std::abs(a.energy - a.arc_length * a.arc_length) < 1e-6);
    CHECK(v_delta(ccm, x, x, o) < 1e-12);
}
