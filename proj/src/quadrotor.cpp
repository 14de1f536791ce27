#include "rampc/quadrotor.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace rampc {

void QuadrotorParams::validate() const
{
    require(m > 0.0 && J > 0.0 && l > 0.0, "QuadrotorParams: m, l, J must be positive");
    require(theta_bar0 > 0.0 && theta_rel_width >= 0.0 && theta_rel_width < 1.0,
            "QuadrotorParams: invalid parameter interval");
    require(d_max >= 0.0 && eps_max >= 0.0 && p_range > 0.0, "QuadrotorParams: invalid bounds");
}

UncertainSystem quadrotor_model(const QuadrotorParams& P)
{
    P.validate();
    UncertainSystem s;
    s.n = 6;
    s.m = 2;
    s.p = 1;
    s.q = 1;
    s.state_names = {"p1", "p2", "phi", "v1", "v2", "phidot"};
    const double g = P.g;
    const double lJ = P.l / P.J;

    s.f = [g](const Vec& x) {
        const double c = std::cos(x(2)), sn = std::sin(x(2));
        Vec out(6);
        out << x(3) * c - x(4) * sn, x(3) * sn + x(4) * c, x(5), x(4) * x(5) - g * sn, -x(3) * x(5) - g * c, 0.0;
        return out;
    };
    s.B = [lJ](const Vec&) {
        Mat B = Mat::Zero(6, 2);
        B(5, 0) = lJ;
        B(5, 1) = -lJ;
        return B;
    };
    s.G = [](const Vec&, const Vec& u) {
        Mat G = Mat::Zero(6, 1);
        G(4, 0) = u(0) + u(1);
        return G;
    };
    s.E = [](const Vec& x) {
        Mat E = Mat::Zero(6, 1);
        E(3, 0) = std::cos(x(2));
        E(4, 0) = -std::sin(x(2));
        return E;
    };
    s.jacobian = [g, lJ](const Vec& x, const Vec&, const Vec& theta, const Vec& d) {
        const double c = std::cos(x(2)), sn = std::sin(x(2));
        const double v1 = x(3), v2 = x(4), w = x(5), dd = d(0);
        Jacobians J{Mat::Zero(6, 6), Mat::Zero(6, 2)};
        J.A(0, 2) = -v1 * sn - v2 * c;
        J.A(0, 3) = c;
        J.A(0, 4) = -sn;
        J.A(1, 2) = v1 * c - v2 * sn;
        J.A(1, 3) = sn;
        J.A(1, 4) = c;
        J.A(2, 5) = 1.0;
        J.A(3, 2) = -g * c - dd * sn;
        J.A(3, 4) = w;
        J.A(3, 5) = v2;
        J.A(4, 2) = g * sn - dd * c;
        J.A(4, 3) = -w;
        J.A(4, 5) = -v1;
        J.Bu(4, 0) = theta(0);
        J.Bu(4, 1) = theta(0);
        J.Bu(5, 0) = lJ;
        J.Bu(5, 1) = -lJ;
        return J;
    };

    const double inf = std::numeric_limits<double>::infinity();
    const double pi = std::numbers::pi;
    Vec x_hi(6), u_lo(2), u_hi(2);
    x_hi << inf, inf, pi / 3.0, 2.0, 1.0, pi;
    u_lo << -1.0, -1.0;
    u_hi << 3.5, 3.5;
    s.constraints = box_constraints(-x_hi, x_hi, u_lo, u_hi, s.state_names);

    s.Theta0 = with_vertices(Polytope::interval((1.0 - P.theta_rel_width) * P.theta_bar0,
                                                (1.0 + P.theta_rel_width) * P.theta_bar0));
    s.D = with_vertices(Polytope::interval(-P.d_max, P.d_max));
    s.D_eps = Polytope::box(Vec::Constant(6, -P.eps_max), Vec::Constant(6, P.eps_max));

    s.sample_lo.resize(8);
    s.sample_hi.resize(8);
    s.sample_hi << P.p_range, P.p_range, pi / 3.0, 2.0, 1.0, pi, 3.5, 3.5;
    s.sample_lo << -P.p_range, -P.p_range, -pi / 3.0, -2.0, -1.0, -pi, -1.0, -1.0;
    s.validate();
    return s;
}

} // namespace rampc
