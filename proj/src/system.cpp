#include "rampc/system.hpp"

#include <cmath>
#include <limits>

namespace rampc {

ConstraintFn affine_constraint(std::string name, const Vec& a_x, const Vec& a_u, double b)
{
    ConstraintFn c;
    c.name = std::move(name);
    c.value = [a_x, a_u, b](const Vec& x, const Vec& u) { return a_x.dot(x) + a_u.dot(u) - b; };
    c.gradient = [a_x, a_u](const Vec&, const Vec&) { return std::make_pair(a_x, a_u); };
    return c;
}

ConstraintFn keep_out_disc(std::string name, int n, int m, std::vector<int> idx, const Vec& center, double radius)
{
    require(static_cast<Eigen::Index>(idx.size()) == center.size(), "keep_out_disc: index/center size mismatch");
    require(radius > 0.0, "keep_out_disc: radius must be positive");
    auto offset = [idx, center](const Vec& x) {
        Vec e(center.size());
        for (std::size_t k = 0; k < idx.size(); ++k)
            e(static_cast<Eigen::Index>(k)) = x(idx[k]) - center(static_cast<Eigen::Index>(k));
        return e;
    };
    ConstraintFn c;
    c.name = std::move(name);
    c.value = [offset, radius](const Vec& x, const Vec&) { return radius - offset(x).norm(); };
    c.gradient = [offset, idx, n, m](const Vec& x, const Vec&) {
        const Vec e = offset(x);
        const double d = e.norm();
        Vec gx = Vec::Zero(n);
        if (d > 1e-12)
            for (std::size_t k = 0; k < idx.size(); ++k) gx(idx[k]) = -e(static_cast<Eigen::Index>(k)) / d;
        return std::make_pair(gx, Vec(Vec::Zero(m)));
    };
    return c;
}

std::vector<ConstraintFn> box_constraints(const Vec& x_lo, const Vec& x_hi, const Vec& u_lo, const Vec& u_hi,
                                          const std::vector<std::string>& state_names)
{
    const auto n = x_lo.size();
    const auto m = u_lo.size();
    require(x_hi.size() == n && u_hi.size() == m, "box_constraints: bound sizes differ");
    std::vector<ConstraintFn> out;
    auto sname = [&](Eigen::Index i) {
        return static_cast<Eigen::Index>(state_names.size()) > i ? state_names[static_cast<std::size_t>(i)]
                                                                 : "x" + std::to_string(i);
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec e = Vec::Zero(n);
        e(i) = 1.0;
        if (std::isfinite(x_hi(i))) out.push_back(affine_constraint(sname(i) + "_max", e, Vec::Zero(m), x_hi(i)));
        if (std::isfinite(x_lo(i))) out.push_back(affine_constraint(sname(i) + "_min", -e, Vec::Zero(m), -x_lo(i)));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        Vec e = Vec::Zero(m);
        e(i) = 1.0;
        const std::string nm = "u" + std::to_string(i + 1);
        if (std::isfinite(u_hi(i))) out.push_back(affine_constraint(nm + "_max", Vec::Zero(n), e, u_hi(i)));
        if (std::isfinite(u_lo(i))) out.push_back(affine_constraint(nm + "_min", Vec::Zero(n), -e, -u_lo(i)));
    }
    return out;
}

void UncertainSystem::validate() const
{
    require(n > 0 && m > 0 && p >= 0 && q >= 0, "UncertainSystem: invalid dimensions");
    require(f && B && G && E, "UncertainSystem: missing dynamics component");
    require(Theta0.dim() == p, "UncertainSystem: Theta0 dimension differs from p");
    require(D.dim() == q, "UncertainSystem: D dimension differs from q");
    require(D_eps.dim() == n, "UncertainSystem: D_eps dimension differs from n");
    require(q == 0 || D.contains(Vec::Zero(q), 1e-12), "UncertainSystem: 0 must lie in D");
    require(sample_lo.size() == n + m && sample_hi.size() == n + m, "UncertainSystem: sampling box has wrong size");
    require(sample_lo.allFinite() && sample_hi.allFinite(), "UncertainSystem: sampling box must be finite");
    require(((sample_hi - sample_lo).array() >= 0.0).all(), "UncertainSystem: sampling box is inverted");
}

Vec eval_dynamics(const UncertainSystem& sys, const Vec& x, const Vec& u, const Vec& theta, const Vec& d)
{
    require_size(x.size(), sys.n, "eval_dynamics: x");
    require_size(u.size(), sys.m, "eval_dynamics: u");
    require_size(theta.size(), sys.p, "eval_dynamics: theta");
    require_size(d.size(), sys.q, "eval_dynamics: d");
    Vec out = sys.f(x) + sys.B(x) * u;
    if (sys.p > 0) out.noalias() += sys.G(x, u) * theta;
    if (sys.q > 0) out.noalias() += sys.E(x) * d;
    return out;
}

Vec eval_nominal(const UncertainSystem& sys, const Vec& z, const Vec& v, const Vec& theta_bar)
{
    return eval_dynamics(sys, z, v, theta_bar, Vec::Zero(sys.q));
}

Jacobians fd_jacobians(const UncertainSystem& sys, const Vec& x, const Vec& u, const Vec& theta, const Vec& d,
                       double h)
{
    Jacobians J{Mat(sys.n, sys.n), Mat(sys.n, sys.m)};
    for (int i = 0; i < sys.n; ++i) {
        Vec xp = x, xm = x;
        const double hi = h * std::max(1.0, std::abs(x(i)));
        xp(i) += hi;
        xm(i) -= hi;
        J.A.col(i) = (eval_dynamics(sys, xp, u, theta, d) - eval_dynamics(sys, xm, u, theta, d)) / (2.0 * hi);
    }
    for (int i = 0; i < sys.m; ++i) {
        Vec up = u, um = u;
        const double hi = h * std::max(1.0, std::abs(u(i)));
        up(i) += hi;
        um(i) -= hi;
        J.Bu.col(i) = (eval_dynamics(sys, x, up, theta, d) - eval_dynamics(sys, x, um, theta, d)) / (2.0 * hi);
    }
    return J;
}

Jacobians eval_jacobians(const UncertainSystem& sys, const Vec& x, const Vec& u, const Vec& theta, const Vec& d)
{
    require_size(x.size(), sys.n, "eval_jacobians: x");
    require_size(u.size(), sys.m, "eval_jacobians: u");
    if (sys.jacobian) return sys.jacobian(x, u, theta, d);
    return fd_jacobians(sys, x, u, theta, d);
}

Vec eval_constraints(const UncertainSystem& sys, const Vec& x, const Vec& u)
{
    Vec h(sys.r());
    for (int j = 0; j < sys.r(); ++j) h(j) = sys.constraints[static_cast<std::size_t>(j)].value(x, u);
    return h;
}

bool in_constraint_set(const UncertainSystem& sys, const Vec& x, const Vec& u, double tol)
{
    for (const auto& c : sys.constraints)
        if (c.value(x, u) > tol) return false;
    return true;
}

} // namespace rampc
