#include "rampc/chebyshev.hpp"

#include <cmath>
#include <numbers>

namespace rampc {

namespace {

/// T_k(t) and dT_k/dt for k = 0..D.
void cheb_t(int D, double t, Vec& T, Vec& dT)
{
    T.resize(D + 1);
    dT.resize(D + 1);
    T(0) = 1.0;
    dT(0) = 0.0;
    if (D == 0) return;
    T(1) = t;
    dT(1) = 1.0;
    for (int k = 2; k <= D; ++k) {
        T(k) = 2.0 * t * T(k - 1) - T(k - 2);
        dT(k) = 2.0 * T(k - 1) + 2.0 * t * dT(k - 1) - dT(k - 2);
    }
}

} // namespace

Vec cgl_nodes(int degree)
{
    require(degree >= 1, "cgl_nodes: degree must be at least 1");
    Vec s(degree + 1);
    for (int i = 0; i <= degree; ++i) s(i) = 0.5 * (1.0 - std::cos(std::numbers::pi * i / degree));
    s(0) = 0.0;
    s(degree) = 1.0;
    return s;
}

void clenshaw_curtis(int num_points, Vec& s, Vec& w)
{
    require(num_points >= 2, "clenshaw_curtis: need at least 2 points");
    const int N = num_points - 1;
    const double pi = std::numbers::pi;
    Vec x(N + 1), wt = Vec::Zero(N + 1);
    for (int j = 0; j <= N; ++j) x(j) = std::cos(pi * j / N);
    // Trefethen, clencurt.m
    Vec v = Vec::Ones(N - 1);
    if (N % 2 == 0) {
        wt(0) = wt(N) = 1.0 / (N * N - 1.0);
        for (int k = 1; k < N / 2; ++k)
            for (int i = 1; i < N; ++i) v(i - 1) -= 2.0 * std::cos(2.0 * k * pi * i / N) / (4.0 * k * k - 1.0);
        for (int i = 1; i < N; ++i) v(i - 1) -= std::cos(N * pi * i / N) / (N * N - 1.0);
    } else {
        wt(0) = wt(N) = 1.0 / (static_cast<double>(N) * N);
        for (int k = 1; k <= (N - 1) / 2; ++k)
            for (int i = 1; i < N; ++i) v(i - 1) -= 2.0 * std::cos(2.0 * k * pi * i / N) / (4.0 * k * k - 1.0);
    }
    for (int i = 1; i < N; ++i) wt(i) = 2.0 * v(i - 1) / N;
    // map [-1, 1] -> [0, 1], ascending in s
    s.resize(N + 1);
    w.resize(N + 1);
    for (int j = 0; j <= N; ++j) {
        s(j) = 0.5 * (1.0 - x(j));
        w(j) = 0.5 * wt(j);
    }
}

ChebyshevBasis::ChebyshevBasis(int D, int quad_points) : degree(D)
{
    nodes = cgl_nodes(D);
    clenshaw_curtis(quad_points > 0 ? quad_points : 2 * D + 3, quad_s, quad_w);
    Mat V(D + 1, D + 1);
    Vec T, dT;
    for (int i = 0; i <= D; ++i) {
        cheb_t(D, 2.0 * nodes(i) - 1.0, T, dT);
        V.row(i) = T.transpose();
    }
    // column j of coeff_ holds the coefficients of the j-th Lagrange polynomial
    coeff_ = V.inverse();
    const auto Q = quad_s.size();
    Phi.resize(Q, D + 1);
    dPhi.resize(Q, D + 1);
    Vec phi, dphi;
    for (Eigen::Index q = 0; q < Q; ++q) {
        eval(quad_s(q), phi, dphi);
        Phi.row(q) = phi.transpose();
        dPhi.row(q) = dphi.transpose();
    }
}

void ChebyshevBasis::eval(double s, Vec& phi, Vec& dphi) const
{
    Vec T, dT;
    cheb_t(degree, 2.0 * s - 1.0, T, dT);
    phi = coeff_.transpose() * T;
    dphi = 2.0 * coeff_.transpose() * dT;
}

} // namespace rampc
