// Acceptance run: one line per criterion, exit status 1 if any fails.
// Oracles are closed forms or brute force, never another code path of the library.

#include "rampc/ccm_verify.hpp"
#include "rampc/config.hpp"
#include "rampc/geodesic.hpp"
#include "rampc/polytope_ops.hpp"
#include "rampc/tube.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace rampc;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string cfg(const std::string& name) { return std::string(RAMPC_SOURCE_DIR) + "/configs/" + name; }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// shared between criteria 5, 6, 9, 10
struct Runs {
    RunConfig reg, obs;
    TubeConstants reg_c, obs_c;
    std::vector<SimLog> seeds; // regulation, 20 seeds
    std::vector<double> seed_time;
    SimLog adaptive, fixed;
};

// 1. Monte Carlo tube containment on the scalar benchmark
Outcome tube_containment()
{
    const auto t0 = Clock::now();
    const RunConfig rc = load_run_config(cfg("scalar_tracking.json"));
    const TubeConstants c = rc.tube_constants();
    const auto ocp = build_ocp(rc.sys, rc.ccm, c, rc.sim.x0, with_vertices(rc.sys.Theta0), rc.mpc, rc.terminal);
    const MPCSolution s = solve_ocp(*ocp);
    if (s.status != SolveStatus::Converged) return {false, "scalar OCP did not converge"};
    const int N = rc.mpc.N, S = rc.mpc.substeps;
    const double h = rc.mpc.Ts / S;
    const auto [lo, hi] = bounding_box(rc.sys.Theta0);
    const auto [dlo, dhi] = bounding_box(rc.sys.D);
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int violations = 0;
    double worst = -1e300;
    const int draws = 1000;
    for (int r = 0; r < draws; ++r) {
        // the first four draws sit on the vertices with constant d
        const bool corner = r < 4;
        Vec th(1), dconst(1);
        th(0) = corner ? (r % 2 ? hi(0) : lo(0)) : lo(0) + U(rng) * (hi(0) - lo(0));
        dconst(0) = r / 2 % 2 ? dhi(0) : dlo(0);
        Vec x = rc.sim.x0;
        Vec z = s.z.row(0).transpose();
        for (int k = 0; k <= N; ++k) {
            const double m = v_delta(rc.ccm, x, z, rc.mpc.geodesic) - s.delta(k);
            worst = std::max(worst, m);
            if (m > 1e-4) ++violations;
            if (k == N) break;
            const Vec v = s.v.row(k).transpose();
            for (int j = 0; j < S; ++j) {
                Vec d(1);
                d(0) = corner ? dconst(0) : dlo(0) + U(rng) * (dhi(0) - dlo(0));
                auto fx = [&](const Vec& xs, const Vec& zs) {
                    return eval_dynamics(rc.sys, xs, feedback_kappa(rc.ccm, xs, zs, v, rc.mpc.geodesic), th, d);
                };
                auto fz = [&](const Vec& zs) { return eval_nominal(rc.sys, zs, v, s.theta_bar); };
                const Vec kx1 = fx(x, z), kz1 = fz(z);
                const Vec kx2 = fx(x + 0.5 * h * kx1, z + 0.5 * h * kz1), kz2 = fz(z + 0.5 * h * kz1);
                const Vec kx3 = fx(x + 0.5 * h * kx2, z + 0.5 * h * kz2), kz3 = fz(z + 0.5 * h * kz2);
                const Vec kx4 = fx(x + h * kx3, z + h * kz3), kz4 = fz(z + h * kz3);
                x += h / 6.0 * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
                z += h / 6.0 * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4);
            }
        }
    }
    const double secs = since(t0);
    return {violations == 0 && secs < 60.0,
            fmt("%d draws x %d nodes, %d violations, max V_delta - delta = %.3e, %.1f s", draws, N + 1, violations,
                worst, secs)};
}

// 2. constant-mismatch tube ODE against its closed form
Outcome tube_ode()
{
    const RunConfig rc = load_run_config(cfg("scalar_tracking.json"));
    const TubeConstants c = rc.tube_constants();
    if (c.L_G(0) != 0.0) return {false, "scalar L_G not zero, mismatch is not constant"};
    const double lam = c.lambda();
    const Vec th_bar = Vec::Zero(1);
    // oracle: || G (theta_i - theta_bar) + E d_j ||_M over box corners, M = 1, G = E = 1
    const auto [lo, hi] = bounding_box(rc.sys.Theta0);
    const auto [dlo, dhi] = bounding_box(rc.sys.D);
    const double sqrtM = std::sqrt(rc.ccm.M_upper(0, 0));
    double wbar = 0.0;
    for (double t : {lo(0), hi(0)})
        for (double d : {dlo(0), dhi(0)}) wbar = std::max(wbar, sqrtM * std::abs(t - th_bar(0) + d));
    const double T = 5.0 / lam;
    const int N = 50;
    const double delta0 = 0.05;
    TubeOptions opts;
    opts.substeps = 20;
    const TubeTrajectory tube = integrate_tube(rc.sys, rc.ccm, c, Vec::Zero(1), delta0, Mat::Zero(N, 1), th_bar,
                                               with_vertices(rc.sys.Theta0), T / N, opts);
    double err = 0.0;
    for (const auto& s : tube.states) {
        const double e = std::exp(-lam * s.t);
        err = std::max(err, std::abs(s.delta - (e * delta0 + (1.0 - e) * wbar / lam)));
    }
    return {err < 1e-6, fmt("lambda %.4g, w_bar %.4g, %zu points over T = %.3g, max error %.2e", lam, wbar,
                            tube.states.size(), T, err)};
}

// 3. geodesics: flat metrics against ||x - z||_M, energy-length identity on the quadrotor metric
Outcome geodesics()
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const int n = 4;
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = U(rng);
    const Mat W = A * A.transpose() + 0.5 * Mat::Identity(n, n);
    const Mat M = W.inverse();
    const CCM flat = CCM::constant(W, Mat::Zero(1, n), 1.0);
    double flat_err = 0.0;
    for (int t = 0; t < 1000; ++t) {
        Vec x(n), z(n);
        for (int i = 0; i < n; ++i) {
            x(i) = 2.0 * U(rng);
            z(i) = 2.0 * U(rng);
        }
        const Vec e = x - z;
        flat_err = std::max(flat_err, std::abs(v_delta(flat, x, z) - std::sqrt(e.dot(M * e))));
    }

    const CCM quad = ccm_from_json(read_json_file(std::string(RAMPC_SOURCE_DIR) + "/data/quadrotor_ccm.json"));
    GeodesicOptions go;
    go.degree = 10;
    const Vec span = (Vec(6) << 2.0, 2.0, 1.0, 2.0, 1.0, 3.0).finished();
    double id_err = 0.0;
    int solved = 0, failed = 0;
    for (int t = 0; t < 100; ++t) {
        Vec x(6), z(6);
        for (int i = 0; i < 6; ++i) {
            x(i) = span(i) * U(rng);
            z(i) = span(i) * U(rng);
        }
        try {
            const GeodesicCurve c = solve_geodesic(quad, x, z, go);
            id_err = std::max(id_err, std::abs(c.energy - c.arc_length * c.arc_length));
            ++solved;
        } catch (const GeodesicError&) {
            ++failed;
        }
    }
    return {flat_err < 1e-8 && id_err < 1e-6 && solved > 0,
            fmt("flat: max |V_delta - ||x-z||_M| = %.2e on 1000 pairs; quadrotor metric, degree %d: "
                "max |E - L^2| = %.2e on %d converged solves (%d not converged)",
                flat_err, go.degree, id_err, solved, failed)};
}

// a two-state linear plant with a constant metric and affine constraints
UncertainSystem linear_plant()
{
    const int p = 2;
    UncertainSystem s;
    s.n = 2;
    s.m = 1;
    s.p = p;
    s.q = 1;
    s.state_names = {"x1", "x2"};
    const Mat A = (Mat(2, 2) << 0.0, 1.0, -1.0, -0.5).finished();
    const Mat B = (Mat(2, 1) << 0.0, 1.0).finished();
    const Mat G = (Mat(2, 2) << 0.2, -0.1, 1.0, 0.4).finished();
    const Mat E = (Mat(2, 1) << 0.3, 1.0).finished();
    s.f = [A](const Vec& x) { return Vec(A * x); };
    s.B = [B](const Vec&) { return B; };
    s.G = [G](const Vec&, const Vec&) { return G; };
    s.E = [E](const Vec&) { return E; };
    s.constraints = {
        affine_constraint("a", (Vec(2) << 1.0, 0.5).finished(), (Vec(1) << 0.3).finished(), 2.0),
        affine_constraint("b", (Vec(2) << -0.4, 1.0).finished(), (Vec(1) << -1.0).finished(), 1.5),
        affine_constraint("c", (Vec(2) << 0.0, 0.0).finished(), (Vec(1) << 1.0).finished(), 3.0),
    };
    s.Theta0 = Polytope::box(Vec::Constant(p, -0.5), Vec::Constant(p, 0.7));
    s.D = Polytope::box(Vec::Constant(1, -0.2), Vec::Constant(1, 0.2));
    s.D_eps = Polytope::box(Vec::Constant(2, -0.05), Vec::Constant(2, 0.05));
    s.sample_lo = Vec::Constant(3, -2.0);
    s.sample_hi = Vec::Constant(3, 2.0);
    s.validate();
    return s;
}

// 4. tightening constants against the analytic value, vertex max against dense sampling
Outcome constants_oracle()
{
    const UncertainSystem sys = linear_plant();
    const Mat W = (Mat(2, 2) << 1.2, -0.3, -0.3, 0.8).finished();
    const Mat Y = (Mat(1, 2) << -0.4, -0.9).finished();
    const CCM ccm = CCM::constant(W, Y, 0.4);
    const Mat K = Y * W.inverse();
    SampleSpec spec;
    spec.kind = SampleSpec::Kind::Grid;
    spec.grid_points = 7;
    spec.filter = false;
    ConstantsOptions raw;
    raw.safety_factor = 1.0;
    const auto samples = generate_samples(sys, spec);
    const Vec c = compute_cj(sys, ccm, samples, raw);
    double c_err = 0.0;
    for (int j = 0; j < sys.r(); ++j) {
        const auto [gx, gu] = sys.constraints[static_cast<std::size_t>(j)].gradient(Vec::Zero(2), Vec::Zero(1));
        const Vec a = gx + K.transpose() * gu;
        c_err = std::max(c_err, std::abs(c(j) - std::sqrt(a.dot(W * a))));
    }

    TubeConstants tc = compute_tube_constants(sys, ccm, samples, raw);
    const Polytope Theta = with_vertices(sys.Theta0);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double vm_err = 0.0;
    const int G = 41;
    for (int t = 0; t < 20; ++t) {
        const Vec z = (Vec(2) << 4 * U(rng) - 2, 4 * U(rng) - 2).finished();
        const Vec v = (Vec(1) << 4 * U(rng) - 2).finished();
        const Vec tb = (Vec(2) << -0.5 + 1.2 * U(rng), -0.5 + 1.2 * U(rng)).finished();
        const double delta = U(rng);
        const double vertex = max_w_bar_requirement(tc, ccm, sys, delta, z, v, Theta, tb);
        double dense = -1e300;
        for (int a = 0; a < G; ++a)
            for (int b = 0; b < G; ++b)
                for (int e = 0; e < G; ++e) {
                    const Vec th = (Vec(2) << -0.5 + 1.2 * a / (G - 1), -0.5 + 1.2 * b / (G - 1)).finished();
                    const Vec d = (Vec(1) << -0.2 + 0.4 * e / (G - 1)).finished();
                    // brute force of sum_k L_G,k |theta_k - tb_k| delta + ||G dtheta + E d||_M
                    const Vec w = sys.G(z, v) * (th - tb) + sys.E(z) * d;
                    const double val = tc.L_G.dot((th - tb).cwiseAbs()) * delta + std::sqrt(w.dot(W.inverse() * w));
                    dense = std::max(dense, val);
                }
        vm_err = std::max(vm_err, std::abs(vertex - dense));
    }
    return {c_err < 1e-8 && vm_err < 1e-9,
            fmt("max |c_j - sqrt(a^T W a)| = %.2e over %d rows; max |vertex max - dense %d^3 grid| = %.2e on 20 points",
                c_err, sys.r(), G, vm_err)};
}

// 5. estimation: truth kept and sets nested on every logged step, interval oracle, collapse
Outcome estimation(const Runs& R)
{
    int steps = 0, bad = 0;
    auto scan = [&](const SimLog& log) {
        for (std::size_t k = 0; k < log.steps.size(); ++k) {
            const auto& s = log.steps[k];
            ++steps;
            bool ok = s.Theta.contains(log.theta_true, 1e-9);
            if (k > 0) ok = ok && contained_in(s.Theta, log.steps[k - 1].Theta, 1e-9);
            if (!ok || !s.theta_true_in || !s.theta_nested) ++bad;
        }
    };
    for (const auto& l : R.seeds) scan(l);
    scan(R.adaptive);

    // 1-D: Delta = [r - dmax - emax, r + dmax + emax] with r = xdot~ + x - u
    const RunConfig sc = load_run_config(cfg("scalar_tracking.json"));
    const UncertainSystem& s1 = sc.sys;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double iv_err = 0.0;
    Polytope Th = with_vertices(s1.Theta0);
    double olo = -0.5, ohi = 0.5;
    for (int t = 0; t < 200; ++t) {
        const Vec x = Vec::Constant(1, 2.0 * U(rng)), u = Vec::Constant(1, 3.0 * U(rng));
        const Vec th = Vec::Constant(1, 0.5 * U(rng)), d = Vec::Constant(1, 0.1 * U(rng));
        const Vec eps = Vec::Constant(1, 0.05 * U(rng));
        const Vec xd = measure_derivative(s1, x, u, th, d, eps);
        const double r = xd(0) + x(0) - u(0);
        const Polytope Dl = nonfalsified_set(s1, {0.0, x, u, xd});
        const auto [lo, hi] = bounding_box(Dl);
        iv_err = std::max({iv_err, std::abs(lo(0) - (r - 0.15)), std::abs(hi(0) - (r + 0.15))});
        if (t < 10) {
            // keep the truth fixed for the intersection sequence
            const Vec xt = measure_derivative(s1, x, u, Vec::Constant(1, 0.3), d, eps);
            const double rt = xt(0) + x(0) - u(0);
            Th = update_parameter_set(Th, {nonfalsified_set(s1, {0.0, x, u, xt})});
            olo = std::max(olo, rt - 0.15);
            ohi = std::min(ohi, rt + 0.15);
            const auto [a, b] = bounding_box(Th);
            iv_err = std::max({iv_err, std::abs(a(0) - olo), std::abs(b(0) - ohi)});
        }
    }

    // D = D_eps = {0}: one measurement pins theta
    UncertainSystem s0 = s1;
    s0.D = Polytope::point(Vec::Zero(1));
    s0.D_eps = Polytope::point(Vec::Zero(1));
    const Vec x0 = Vec::Constant(1, 0.7), u0 = Vec::Constant(1, -0.4);
    const Vec th0 = Vec::Constant(1, 0.3);
    const Polytope T1 = update_parameter_set(
        with_vertices(s0.Theta0),
        {nonfalsified_set(s0, {0.0, x0, u0, measure_derivative(s0, x0, u0, th0, Vec::Zero(1), Vec::Zero(1))})});
    const double width = parameter_set_size(T1);

    return {steps > 0 && bad == 0 && iv_err < 1e-12 && width < 1e-9,
            fmt("%d logged steps, %d with truth outside or nesting broken; interval oracle max error %.1e; "
                "noise-free width after one update %.1e",
                steps, bad, iv_err, width)};
}

// 6. recursive feasibility and cost decrease over 20 seeds
Outcome recursive_feasibility(const Runs& R)
{
    int cand_bad = 0, dec_bad = 0, incomplete = 0, conv_bad = 0, from_cand = 0, steps = 0;
    double worst_dec = -1e300, worst_track = 0.0;
    for (const auto& l : R.seeds) {
        if (l.status != SimStatus::Completed || l.steps.size() != 60) ++incomplete;
        for (const auto& s : l.steps) {
            ++steps;
            if (s.from_candidate) ++from_cand;
            if (s.k == 0) continue;
            if (!s.candidate.available || !s.candidate.feasible) ++cand_bad;
            worst_dec = std::max(worst_dec, s.cost_decrease);
            if (s.cost_decrease > 1e-6) ++dec_bad;
        }
        const double te = l.steps.empty() ? 1e300 : l.steps.back().tracking_error;
        worst_track = std::max(worst_track, te);
        if (te > 1e-2) ++conv_bad;
    }
    return {incomplete == 0 && cand_bad == 0 && dec_bad == 0 && conv_bad == 0,
            fmt("%zu seeds, %d steps: %d incomplete runs, %d infeasible candidates, max V decrease residual %.2e "
                "(%d > 1e-6), final tracking error max %.2e, candidate applied %d times",
                R.seeds.size(), steps, incomplete, cand_bad, worst_dec, dec_bad, worst_track, from_cand)};
}

// 7. adaptation benefit
Outcome adaptation(const Runs& R)
{
    const auto& a = R.adaptive;
    const auto& f = R.fixed;
    if (a.status != SimStatus::Completed || f.status != SimStatus::Completed || a.steps.size() < 2)
        return {false, "obstacle runs did not complete: " + a.message + " / " + f.message};
    const double ca = a.total_cost(), cf = f.total_cost();
    const double red = 1.0 - a.steps[1].theta_size / a.steps[0].theta_size;
    // the plan at x(t_1) with Theta_0 against the plan with Theta_{t_1}
    const auto& s1 = a.steps[1];
    const auto o0 = build_ocp(R.obs.sys, R.obs.ccm, R.obs_c, s1.x, with_vertices(R.obs.sys.Theta0), R.obs.mpc,
                              R.obs.terminal);
    const MPCSolution p0 = solve_ocp(*o0);
    const bool p0_ok = p0.status == SolveStatus::Converged && o0->check(o0->encode(p0)).pass(R.obs.mpc.check_tol);
    return {ca < cf && red > 0.0,
            fmt("closed-loop cost %.4f adaptive vs %.4f fixed; width after first update %.1f%% smaller; "
                "plan cost at t_1: %.4f with Theta_t1, %s with Theta_0",
                ca, cf, 100.0 * red, s1.cost, p0_ok ? fmt("%.4f", p0.cost).c_str() : "infeasible")};
}

// 8. rigid vs homothetic tube in a corridor
Outcome rigid_vs_homothetic()
{
    const RunConfig rc = load_run_config(cfg("quadrotor_corridor.json"));
    const TubeConstants c = rc.tube_constants();
    auto solve = [&](const UncertainSystem& sys, const TubeConstants& tc, bool rigid, double* rd) {
        MPCConfig m = rc.mpc;
        m.rigid = rigid;
        const auto ocp = build_ocp(sys, rc.ccm, tc, rc.sim.x0, with_vertices(sys.Theta0), m, rc.terminal);
        const MPCSolution s = solve_ocp(*ocp);
        if (rd) *rd = ocp->rigid_delta();
        return s.status == SolveStatus::Converged && ocp->check(ocp->encode(s)).pass(m.check_tol);
    };
    double rd = 0.0;
    const bool homothetic = solve(rc.sys, c, false, nullptr);
    const bool rigid = solve(rc.sys, c, true, &rd);
    // control: same system without the corridor rows
    UncertainSystem open = rc.sys;
    TubeConstants oc = c;
    const int keep = open.r() - 2;
    open.constraints.resize(static_cast<std::size_t>(keep));
    oc.c = c.c.head(keep);
    const bool rigid_open = solve(open, oc, true, nullptr);
    const double cw = c.c(c.c.size() - 1);
    return {homothetic && !rigid,
            fmt("corridor |p2| <= %.3f, rigid tube needs %.3f: homothetic %s, rigid %s (rigid without corridor %s)",
                rc.sys.constraints.back().value(Vec::Zero(6), Vec::Zero(2)) * -1.0, cw * rd,
                homothetic ? "Feasible" : "Infeasible", rigid ? "Feasible" : "Infeasible",
                rigid_open ? "Feasible" : "Infeasible")};
}

// 9. NLP derivatives against central differences at feasible closed-loop iterates
Outcome gradients(const Runs& R)
{
    struct Pick {
        const RunConfig* rc;
        const TubeConstants* c;
        const SimStep* s;
    };
    std::vector<Pick> pool;
    for (const auto& l : R.seeds)
        for (const auto& s : l.steps) pool.push_back({&R.reg, &R.reg_c, &s});
    std::vector<Pick> obs;
    for (const auto& s : R.adaptive.steps) obs.push_back({&R.obs, &R.obs_c, &s});
    std::mt19937_64 rng(9);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::shuffle(obs.begin(), obs.end(), rng);
    std::vector<Pick> picks(obs.begin(), obs.begin() + std::min<std::size_t>(25, obs.size()));
    for (std::size_t i = 0; picks.size() < 50 && i < pool.size(); ++i) picks.push_back(pool[i]);

    double worst = 0.0, worst_feas = 0.0;
    std::string where;
    for (const auto& p : picks) {
        const auto ocp =
            build_ocp(p.rc->sys, p.rc->ccm, *p.c, p.s->x, p.s->Theta, p.rc->mpc, p.rc->terminal);
        const NLPProblem& nlp = ocp->nlp();
        const Vec x = p.s->solution;
        const OCPCheck chk = ocp->check(x);
        worst_feas = std::max({worst_feas, chk.max_eq, chk.max_in, chk.max_bound});
        Vec g, ce, ci;
        Mat Je, Ji;
        nlp.objective(x, &g);
        nlp.eq(x, ce, &Je);
        nlp.ineq(x, ci, &Ji);
        for (int i = 0; i < nlp.n; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
            Vec xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            Vec cp, cm, dp, dm;
            const double fd_f = (nlp.objective(xp, nullptr) - nlp.objective(xm, nullptr)) / (2.0 * h);
            nlp.eq(xp, cp, nullptr);
            nlp.eq(xm, cm, nullptr);
            nlp.ineq(xp, dp, nullptr);
            nlp.ineq(xm, dm, nullptr);
            auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
            auto note = [&](double e, const std::string& w) {
                if (e > worst) {
                    worst = e;
                    where = w;
                }
            };
            note(rel(g(i), fd_f), "objective");
            const Vec fe = (cp - cm) / (2.0 * h), fi = (dp - dm) / (2.0 * h);
            for (int r = 0; r < nlp.n_eq; ++r) note(rel(Je(r, i), fe(r)), ocp->eq_labels()[static_cast<std::size_t>(r)]);
            for (int r = 0; r < nlp.n_in; ++r) note(rel(Ji(r, i), fi(r)), ocp->in_labels()[static_cast<std::size_t>(r)]);
        }
    }
    return {picks.size() == 50 && worst < 1e-5 && worst_feas <= 1e-5,
            fmt("%zu applied closed-loop iterates (max residual %.1e): max relative error %.2e (%s)", picks.size(),
                worst_feas, worst, where.c_str())};
}

// 10. desk-scale timing
Outcome performance(const Runs& R)
{
    const auto t0 = Clock::now();
    const auto ocp = build_ocp(R.reg.sys, R.reg.ccm, R.reg_c, R.reg.sim.x0, with_vertices(R.reg.sys.Theta0), R.reg.mpc,
                               R.reg.terminal);
    const MPCSolution s = solve_ocp(*ocp);
    const double t_ocp = since(t0);
    const double t_loop = *std::max_element(R.seed_time.begin(), R.seed_time.end());
    return {s.status == SolveStatus::Converged && t_ocp < 10.0 && t_loop < 600.0,
            fmt("cold OCP solve (N = %d) %.2f s; slowest 60-step closed loop %.1f s", R.reg.mpc.N, t_ocp, t_loop)};
}

} // namespace

int main()
{
    int failed = 0;
    auto report = [&](int k, const char* what, const Outcome& o) {
        std::printf("criterion %2d %s  %s: %s\n", k, o.pass ? "PASS" : "FAIL", what, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    };
    auto guarded = [&](int k, const char* what, const std::function<Outcome()>& fn) {
        try {
            report(k, what, fn());
        } catch (const std::exception& e) {
            report(k, what, {false, std::string("exception: ") + e.what()});
        }
    };

    guarded(1, "tube containment", tube_containment);
    guarded(2, "tube ODE oracle", tube_ode);
    guarded(3, "geodesic exactness", geodesics);
    guarded(4, "constants oracle", constants_oracle);

    Runs R;
    bool runs_ok = true;
    try {
        R.reg = load_run_config(cfg("quadrotor_regulation.json"));
        R.obs = load_run_config(cfg("quadrotor_obstacle.json"));
        R.reg_c = R.reg.tube_constants();
        R.obs_c = R.obs.tube_constants();
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            SimConfig sc = R.reg.sim;
            sc.seed = seed;
            const auto t0 = Clock::now();
            R.seeds.push_back(run_closed_loop(R.reg.sys, R.reg.ccm, R.reg_c, R.reg.mpc, R.reg.terminal, sc));
            R.seed_time.push_back(since(t0));
        }
        SimConfig sa = R.obs.sim;
        R.adaptive = run_closed_loop(R.obs.sys, R.obs.ccm, R.obs_c, R.obs.mpc, R.obs.terminal, sa);
        sa.adaptation = false;
        R.fixed = run_closed_loop(R.obs.sys, R.obs.ccm, R.obs_c, R.obs.mpc, R.obs.terminal, sa);
    } catch (const std::exception& e) {
        std::printf("closed-loop runs failed: %s\n", e.what());
        runs_ok = false;
    }
    auto need_runs = [&](const std::function<Outcome()>& fn) {
        return [&, fn] { return runs_ok ? fn() : Outcome{false, "closed-loop runs unavailable"}; };
    };
    guarded(5, "estimation", need_runs([&] { return estimation(R); }));
    guarded(6, "recursive feasibility and cost decrease", need_runs([&] { return recursive_feasibility(R); }));
    guarded(7, "adaptation benefit", need_runs([&] { return adaptation(R); }));
    guarded(8, "rigid vs homothetic", rigid_vs_homothetic);
    guarded(9, "gradient checks", need_runs([&] { return gradients(R); }));
    guarded(10, "desk-scale performance", need_runs([&] { return performance(R); }));

    std::printf("%d of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
