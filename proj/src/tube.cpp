#include "rampc/tube.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace rampc {

namespace {

std::vector<Vec> vertices_or_origin(const Polytope& P, int dim)
{
    if (dim == 0) return {Vec(0)};
    return vertex_list(P);
}

double mismatch_norm(const CCM& ccm, const UncertainSystem& sys, const Vec& z, const Vec& v, const Vec& dtheta,
                     const Vec& d, const TubeOptions& opts)
{
    Vec w = Vec::Zero(sys.n);
    if (sys.p > 0) w.noalias() += sys.G(z, v) * dtheta;
    if (sys.q > 0) w.noalias() += sys.E(z) * d;
    if (opts.conservative) {
        require(ccm.has_bounds(), "conservative tube mode needs M_upper");
        return std::sqrt(std::max(0.0, w.dot(ccm.M_upper * w)));
    }
    return (eval_metric_sqrt(ccm, z) * w).norm();
}

double gain_term(const TubeConstants& consts, const Vec& dtheta)
{
    return dtheta.size() == 0 ? 0.0 : consts.L_G.dot(dtheta.cwiseAbs());
}

} // namespace

double w_bar_requirement(const TubeConstants& consts, const CCM& ccm, const UncertainSystem& sys, double delta,
                         const Vec& z, const Vec& v, const Vec& theta_i, const Vec& d_j, const Vec& theta_bar,
                         const TubeOptions& opts)
{
    const Vec dth = theta_i - theta_bar;
    return gain_term(consts, dth) * delta + mismatch_norm(ccm, sys, z, v, dth, d_j, opts);
}

double max_w_bar_requirement(const TubeConstants& consts, const CCM& ccm, const UncertainSystem& sys, double delta,
                             const Vec& z, const Vec& v, const Polytope& Theta, const Vec& theta_bar,
                             const TubeOptions& opts)
{
    const auto thetas = vertices_or_origin(Theta, sys.p);
    const auto ds = vertices_or_origin(sys.D, sys.q);
    require(!thetas.empty() && !ds.empty(), "f_delta: empty vertex set");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& th : thetas)
        for (const auto& d : ds)
            best = std::max(best, w_bar_requirement(consts, ccm, sys, delta, z, v, th, d, theta_bar, opts));
    return best;
}

double f_delta(const TubeConstants& consts, const CCM& ccm, const UncertainSystem& sys, double delta, const Vec& z,
               const Vec& v, const Polytope& Theta, const Vec& theta_bar, const TubeOptions& opts)
{
    return -consts.lambda() * delta + max_w_bar_requirement(consts, ccm, sys, delta, z, v, Theta, theta_bar, opts);
}

Vec tightened_constraints(const UncertainSystem& sys, const TubeConstants& consts, const Vec& z, const Vec& v,
                          double delta)
{
    require_size(consts.c.size(), sys.r(), "tightened_constraints: c");
    return eval_constraints(sys, z, v) + consts.c * delta;
}

TubeTrajectory integrate_tube(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts, const Vec& z0,
                              double delta0, const Mat& v_profile, const Vec& theta_bar, const Polytope& Theta,
                              double Ts, const TubeOptions& opts)
{
    require(Ts > 0.0 && opts.substeps >= 1, "integrate_tube: invalid step");
    require(v_profile.cols() == sys.m, "integrate_tube: v_profile must have m columns");
    const double h = Ts / opts.substeps;
    TubeTrajectory out;
    Vec z = z0;
    double delta = delta0;
    out.states.push_back({0.0, z, delta});
    auto rhs = [&](const Vec& zz, double dd, const Vec& v, Vec& dz) {
        dz = eval_nominal(sys, zz, v, theta_bar);
        return f_delta(consts, ccm, sys, dd, zz, v, Theta, theta_bar, opts);
    };
    int step = 0;
    for (Eigen::Index k = 0; k < v_profile.rows(); ++k) {
        const Vec v = v_profile.row(k).transpose();
        for (int s = 0; s < opts.substeps; ++s, ++step) {
            Vec k1, k2, k3, k4;
            const double l1 = rhs(z, delta, v, k1);
            const double l2 = rhs(z + 0.5 * h * k1, delta + 0.5 * h * l1, v, k2);
            const double l3 = rhs(z + 0.5 * h * k2, delta + 0.5 * h * l2, v, k3);
            const double l4 = rhs(z + h * k3, delta + h * l3, v, k4);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            delta += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
            if (!z.allFinite() || !std::isfinite(delta)) throw IntegrationError("tube integration diverged", step);
            if (delta < 0.0) {
                if (delta < -1e-12) std::cerr << "warning: tube scaling clamped at step " << step << '\n';
                delta = 0.0;
                ++out.clamped;
            }
            out.states.push_back({static_cast<double>(step + 1) * h, z, delta});
        }
    }
    return out;
}

double rigid_tube_scaling(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts,
                          const Polytope& Theta, const Vec& theta_bar, const std::vector<Sample>& samples,
                          const TubeOptions& opts)
{
    require(!samples.empty(), "rigid_tube_scaling: empty sample set");
    const auto thetas = vertices_or_origin(Theta, sys.p);
    const auto ds = vertices_or_origin(sys.D, sys.q);
    double best = 0.0;
    for (const auto& th : thetas) {
        const Vec dth = th - theta_bar;
        const double denom = consts.lambda() - gain_term(consts, dth);
        if (denom <= 0.0) throw RigidTubeInfeasible("rigid tube: contraction rate does not dominate the uncertainty");
        for (const auto& d : ds)
            for (const auto& s : samples)
                best = std::max(best, mismatch_norm(ccm, sys, s.x, s.u, dth, d, opts) / denom);
    }
    return best;
}

void write_tube_csv(const std::string& path, const TubeTrajectory& tube, const std::vector<std::string>& names)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << "t";
    const auto n = tube.states.empty() ? 0 : tube.states.front().z.size();
    for (Eigen::Index i = 0; i < n; ++i)
        out << ',' << (static_cast<Eigen::Index>(names.size()) > i ? names[static_cast<std::size_t>(i)]
                                                                   : "z" + std::to_string(i + 1));
    out << ",delta\n" << std::setprecision(12);
    for (const auto& s : tube.states) {
        out << s.t;
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << s.z(i);
        out << ',' << s.delta << '\n';
    }
}

} // namespace rampc
