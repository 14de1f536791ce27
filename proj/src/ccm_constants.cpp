#include "rampc/ccm_constants.hpp"
#include "rampc/polytope.hpp"

#include <algorithm>
#include <numeric>

namespace rampc {

namespace {

/// ||S R^{-1}||_2
double norm_times_inv_sqrt(const Mat& S, const Mat& R)
{
    const Mat X = R.transpose().triangularView<Eigen::Lower>().solve(S.transpose()).transpose();
    if (X.rows() == 1 || X.cols() == 1) return X.norm();
    return Eigen::JacobiSVD<Mat>(X).singularValues()(0);
}

/// d(R c(x))/dx for a vector field c, columns indexed by x_i.
template <class Field>
Mat sqrt_weighted_jacobian(const std::vector<Mat>& dR, const Mat& R, const Vec& x, Field&& c)
{
    const auto n = x.size();
    const Vec c0 = c(x);
    Mat out(R.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
        Vec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        const Vec dc = (c(xp) - c(xm)) / (2.0 * h);
        out.col(i) = dR[static_cast<std::size_t>(i)] * c0 + R * dc;
    }
    return out;
}

Mat G_sensitivity(const UncertainSystem& sys, const MetricPoint& mp, const std::vector<Mat>& dR, int k, const Vec& x,
                  const Vec& u)
{
    Mat Gs = sqrt_weighted_jacobian(dR, mp.R, x, [&](const Vec& y) { return Vec(sys.G(y, u).col(k)); });
    // G is affine in u, so unit differences are exact
    const Vec g0 = sys.G(x, u).col(k);
    Mat dGu(sys.n, sys.m);
    for (int l = 0; l < sys.m; ++l) {
        Vec up = u;
        up(l) += 1.0;
        dGu.col(l) = sys.G(x, up).col(k) - g0;
    }
    Gs.noalias() += mp.R * dGu * mp.K;
    return Gs;
}

Mat E_sensitivity(const UncertainSystem& sys, const MetricPoint& mp, const std::vector<Mat>& dR, const Vec& x,
                  const Vec& d)
{
    return sqrt_weighted_jacobian(dR, mp.R, x, [&](const Vec& y) { return Vec(sys.E(y) * d); });
}

/// Sampled maximum of F with optional projected gradient ascent from the best points.
template <class F>
double sampled_max(const UncertainSystem& sys, const std::vector<Sample>& samples, const ConstantsOptions& opts, F&& fn)
{
    require(!samples.empty(), "sampled maximisation over an empty sample set");
    std::vector<double> vals(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) vals[s] = fn(samples[s].x, samples[s].u);
    double best = *std::max_element(vals.begin(), vals.end());
    if (opts.refine_fraction <= 0.0 || opts.refine_iters <= 0) return best;

    const std::size_t n_start =
        std::max<std::size_t>(1, static_cast<std::size_t>(opts.refine_fraction * static_cast<double>(samples.size())));
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(n_start, order.size())),
                      order.end(), [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });

    const int dim = sys.n + sys.m;
    const Vec width = sys.sample_hi - sys.sample_lo;
    auto eval = [&](const Vec& y) {
        const Vec x = y.head(sys.n), u = y.tail(sys.m);
        if (!in_constraint_set(sys, x, u, 0.0)) return -std::numeric_limits<double>::infinity();
        try {
            return fn(x, u);
        } catch (const CCMDomainError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    for (std::size_t s = 0; s < std::min(n_start, order.size()); ++s) {
        Vec y(dim);
        y << samples[order[s]].x, samples[order[s]].u;
        double fy = vals[order[s]];
        double step = 0.05;
        for (int it = 0; it < opts.refine_iters && step > 1e-6; ++it) {
            Vec grad(dim);
            for (int k = 0; k < dim; ++k) {
                const double h = 1e-6 * std::max(1.0, width(k));
                Vec yp = y, ym = y;
                yp(k) = std::min(yp(k) + h, sys.sample_hi(k));
                ym(k) = std::max(ym(k) - h, sys.sample_lo(k));
                const double fp = eval(yp), fm = eval(ym);
                grad(k) = (std::isfinite(fp) && std::isfinite(fm) && yp(k) > ym(k)) ? (fp - fm) / (yp(k) - ym(k)) : 0.0;
            }
            const Vec dir = grad.cwiseProduct(width);
            if (dir.norm() == 0.0) break;
            bool improved = false;
            while (step > 1e-6) {
                Vec yn = y + step * width.cwiseProduct(dir) / dir.norm();
                yn = yn.cwiseMax(sys.sample_lo).cwiseMin(sys.sample_hi);
                const double fn_ = eval(yn);
                if (fn_ > fy) {
                    y = yn;
                    fy = fn_;
                    improved = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            if (!improved) break;
        }
        best = std::max(best, fy);
    }
    return best;
}

std::vector<Vec> vertices_or_origin(const Polytope& P, int dim)
{
    if (dim == 0) return {Vec(0)};
    return vertex_list(P);
}

} // namespace

double cj_at(const UncertainSystem& sys, const CCM& ccm, int j, const Vec& x, const Vec& u)
{
    const MetricPoint mp = eval_metric_point(ccm, x);
    const auto [gx, gu] = sys.constraints[static_cast<std::size_t>(j)].gradient(x, u);
    const Mat row = gx.transpose() + gu.transpose() * mp.K;
    return norm_times_inv_sqrt(row, mp.R);
}

double LG_at(const UncertainSystem& sys, const CCM& ccm, int k, const Vec& x, const Vec& u)
{
    const MetricPoint mp = eval_metric_point(ccm, x);
    const auto dR = eval_metric_sqrt_derivatives(ccm, mp, x);
    return norm_times_inv_sqrt(G_sensitivity(sys, mp, dR, k, x, u), mp.R);
}

double LD_at(const UncertainSystem& sys, const CCM& ccm, const Vec& x, const Vec& d)
{
    const MetricPoint mp = eval_metric_point(ccm, x);
    const auto dR = eval_metric_sqrt_derivatives(ccm, mp, x);
    return norm_times_inv_sqrt(E_sensitivity(sys, mp, dR, x, d), mp.R);
}

Vec compute_cj(const UncertainSystem& sys, const CCM& ccm, const std::vector<Sample>& samples,
               const ConstantsOptions& opts)
{
    require(!samples.empty(), "compute_cj: empty sample set");
    Vec c(sys.r());
    for (int j = 0; j < sys.r(); ++j)
        c(j) = opts.safety_factor * sampled_max(sys, samples, opts, [&](const Vec& x, const Vec& u) {
                   return cj_at(sys, ccm, j, x, u);
               });
    return c;
}

Vec compute_LG(const UncertainSystem& sys, const CCM& ccm, const std::vector<Sample>& samples,
               const ConstantsOptions& opts)
{
    require(!samples.empty(), "compute_LG: empty sample set");
    Vec L(sys.p);
    for (int k = 0; k < sys.p; ++k)
        L(k) = opts.safety_factor * sampled_max(sys, samples, opts, [&](const Vec& x, const Vec& u) {
                   return LG_at(sys, ccm, k, x, u);
               });
    return L;
}

double compute_LD(const UncertainSystem& sys, const CCM& ccm, const std::vector<Sample>& samples,
                  const ConstantsOptions& opts)
{
    require(!samples.empty(), "compute_LD: empty sample set");
    if (sys.q == 0) return 0.0;
    double best = 0.0;
    for (const auto& d : vertices_or_origin(sys.D, sys.q)) {
        if (d.norm() == 0.0) continue;
        best = std::max(best, sampled_max(sys, samples, opts,
                                          [&](const Vec& x, const Vec&) { return LD_at(sys, ccm, x, d); }));
    }
    return opts.safety_factor * best;
}

TubeConstants compute_tube_constants(const UncertainSystem& sys, const CCM& ccm, const std::vector<Sample>& samples,
                                     const ConstantsOptions& opts)
{
    TubeConstants tc;
    tc.rho_c = ccm.rho_c;
    tc.c = compute_cj(sys, ccm, samples, opts);
    tc.L_G = compute_LG(sys, ccm, samples, opts);
    tc.L_D = compute_LD(sys, ccm, samples, opts);
    tc.safety_factor = opts.safety_factor;
    tc.num_samples = samples.size();
    return tc;
}

} // namespace rampc
