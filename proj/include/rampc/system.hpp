#pragma once

#include "rampc/polytope.hpp"
#include "rampc/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace rampc {

/// Smooth scalar constraint h(x,u) <= 0 with its gradient.
struct ConstraintFn {
    std::string name;
    std::function<double(const Vec& x, const Vec& u)> value;
    /// Returns (dh/dx, dh/du).
    std::function<std::pair<Vec, Vec>(const Vec& x, const Vec& u)> gradient;
};

/// h = a_x^T x + a_u^T u - b.
ConstraintFn affine_constraint(std::string name, const Vec& a_x, const Vec& a_u, double b);

/// h = r - ||x[idx] - center|| (keep-out disc on selected state coordinates).
/// Unit-norm gradient away from the centre, which lies outside the feasible set.
ConstraintFn keep_out_disc(std::string name, int n, int m, std::vector<int> idx, const Vec& center, double radius);

/// One-sided rows for every finite bound of the boxes lo <= x <= hi, lo <= u <= hi.
std::vector<ConstraintFn> box_constraints(const Vec& x_lo, const Vec& x_hi, const Vec& u_lo, const Vec& u_hi,
                                          const std::vector<std::string>& state_names = {});

struct Jacobians {
    Mat A;  // df_w/dx
    Mat Bu; // df_w/du
};

/// d f_w / d x and d f_w / d u at (x, u, theta, d).
using JacobianFn = std::function<Jacobians(const Vec& x, const Vec& u, const Vec& theta, const Vec& d)>;

/// x' = f(x) + B(x) u + G(x,u) theta + E(x) d  with G affine in u.
struct UncertainSystem {
    int n = 0, m = 0, p = 0, q = 0;
    std::vector<std::string> state_names;

    std::function<Vec(const Vec& x)> f;
    std::function<Mat(const Vec& x)> B;
    std::function<Mat(const Vec& x, const Vec& u)> G;
    std::function<Mat(const Vec& x)> E;
    /// Optional closed form; central differences are used when empty.
    JacobianFn jacobian;

    std::vector<ConstraintFn> constraints;
    Polytope Theta0;
    Polytope D;
    Polytope D_eps;

    /// Sampling box over (x, u) covering the constraint set; used for all
    /// sampled maximisations. Entries left infinite are not allowed.
    Vec sample_lo;
    Vec sample_hi;

    int r() const { return static_cast<int>(constraints.size()); }

    /// Dimension, 0 in D, and box consistency checks.
    void validate() const;
};

Vec eval_dynamics(const UncertainSystem& sys, const Vec& x, const Vec& u, const Vec& theta, const Vec& d);
Vec eval_nominal(const UncertainSystem& sys, const Vec& z, const Vec& v, const Vec& theta_bar);
Jacobians eval_jacobians(const UncertainSystem& sys, const Vec& x, const Vec& u, const Vec& theta, const Vec& d);
Jacobians fd_jacobians(const UncertainSystem& sys, const Vec& x, const Vec& u, const Vec& theta, const Vec& d,
                       double h = 1e-6);

Vec eval_constraints(const UncertainSystem& sys, const Vec& x, const Vec& u);

/// (z, v) in the constraint set, all h_j <= tol.
bool in_constraint_set(const UncertainSystem& sys, const Vec& x, const Vec& u, double tol = 0.0);

} // namespace rampc
