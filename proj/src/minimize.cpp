#include "rampc/minimize.hpp"

#include <algorithm>
#include <cmath>

namespace rampc {

BfgsResult bfgs_minimize(const SmoothObjective& fn, const Vec& x0, const BfgsOptions& opts)
{
    const auto n = x0.size();
    BfgsResult res;
    res.x = x0;
    Vec g(n);
    res.f = fn(res.x, g);
    const bool given = opts.inv_hessian0.rows() == n && opts.inv_hessian0.cols() == n;
    Mat H = given ? opts.inv_hessian0 : Mat::Identity(n, n);
    bool scaled = given;
    bool stalled = false;
    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        res.grad_norm = g.lpNorm<Eigen::Infinity>();
        if (n == 0 || res.grad_norm <= opts.grad_tol * std::max(1.0, std::abs(res.f))) {
            res.converged = true;
            return res;
        }
        Vec p = -H * g;
        double slope = g.dot(p);
        if (slope >= 0.0) {
            H.setIdentity();
            p = -g;
            slope = -g.squaredNorm();
        }
        double t = 1.0;
        Vec xn, gn(n);
        double fn_ = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = res.x + t * p;
            fn_ = fn(xn, gn);
            if (std::isfinite(fn_) && fn_ < res.f && fn_ <= res.f + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            stalled = true;
            break;
        }
        const Vec s = xn - res.x;
        const Vec y = gn - g;
        const double sy = s.dot(y);
        res.x = xn;
        res.f = fn_;
        g = gn;
        if (sy > 1e-14 * s.norm() * y.norm()) {
            if (!scaled) {
                H *= sy / y.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Mat I = Mat::Identity(n, n);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
    }
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, std::abs(res.f));
    // no strict decrease left: f is at its rounding floor
    res.converged = res.grad_norm <= opts.grad_tol * scale || (stalled && res.grad_norm <= opts.stall_tol * scale);
    return res;
}

} // namespace rampc
