#include "rampc/simulator.hpp"
#include "rampc/polytope_ops.hpp"
#include "rampc/tube.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace rampc {

void SimConfig::validate(const UncertainSystem& sys, const MPCConfig& mpc) const
{
    require(duration > 0.0, "SimConfig: duration must be positive");
    require(n_m >= 1, "SimConfig: n_m must be at least 1");
    const int s = substeps < 0 ? mpc.substeps : substeps;
    require(s >= 1, "SimConfig: substeps must be at least 1");
    require(s % n_m == 0, "SimConfig: substeps must be a multiple of n_m");
    require_size(x0.size(), sys.n, "SimConfig: x0");
    require_size(theta_true.size(), sys.p, "SimConfig: theta_true");
    require(sys.p == 0 || sys.Theta0.contains(theta_true, 1e-12), "SimConfig: theta_true must lie in Theta_0");
}

int SimConfig::steps(double Ts) const { return static_cast<int>(std::lround(duration / Ts)); }

std::string to_string(SimStatus s)
{
    switch (s) {
    case SimStatus::Completed: return "completed";
    case SimStatus::InitialInfeasible: return "initial_infeasible";
    case SimStatus::Infeasible: return "infeasible";
    case SimStatus::EstimationFailed: return "estimation_failed";
    }
    return "unknown";
}

double SimLog::total_cost() const
{
    double c = 0.0;
    for (const auto& s : steps) c += s.stage_cost;
    return c;
}

Vec measure_derivative(const UncertainSystem& sys, const Vec& x, const Vec& u, const Vec& theta_true, const Vec& d,
                       const Vec& eps)
{
    return eval_dynamics(sys, x, u, theta_true, d) + eps;
}

Vec sample_uniform(const Polytope& P, std::mt19937_64& rng)
{
    const auto [lo, hi] = bounding_box(P);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int tries = 0; tries < 100000; ++tries) {
        Vec x(lo.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * U(rng);
        if (P.contains(x, 1e-12)) return x;
    }
    throw ContractViolation("sample_uniform: rejection sampling failed");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Geodesic feedback with a warm-started curve; failures fall back to the best iterate.
struct Feedback {
    const CCM& ccm;
    const ChebyshevBasis& basis;
    const GeodesicOptions& opts;
    Mat warm;
    int failures = 0;

    GeodesicCurve curve(const Vec& x, const Vec& z)
    {
        GeodesicCurve c;
        try {
            c = solve_geodesic(ccm, basis, x, z, opts, warm.size() ? &warm : nullptr);
        } catch (const GeodesicError& e) {
            ++failures;
            c = e.best();
        }
        if (c.degree >= 2) warm = c.values.middleCols(1, c.degree - 1);
        return c;
    }

    Vec kappa(const Vec& x, const Vec& z, const Vec& v) { return feedback_kappa(ccm, basis, curve(x, z), v); }
};

Vec zero_or_sample(const Polytope& P, int dim, bool draw, std::mt19937_64& rng)
{
    if (dim == 0) return Vec(0);
    return draw ? sample_uniform(P, rng) : Vec::Zero(dim);
}

CandidateInfo evaluate_candidate(const OCP& ocp, const MPCSolution& cand, const MPCSolution& prev, double tol)
{
    CandidateInfo c;
    c.available = true;
    const OCPCheck chk = ocp.check(ocp.encode(cand));
    c.violation = std::max({chk.max_eq, chk.max_in, chk.max_bound});
    c.worst = chk.worst;
    c.feasible = chk.pass(tol);
    c.cost = cand.cost;
    c.nesting = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k + 1 < prev.delta.size(); ++k)
        c.nesting = std::max(c.nesting, cand.delta(k) - prev.delta(k + 1));
    c.cost_excess = cand.cost - (prev.cost - prev.stage_cost(0));
    return c;
}

} // namespace

SimLog run_closed_loop(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts,
                       const MPCConfig& mpc_in, const TerminalSpec& terminal, const SimConfig& sim)
{
    MPCConfig mpc = mpc_in;
    mpc.prepare(sys.n, sys.m);
    mpc.rigid = sim.rigid;
    sim.validate(sys, mpc);
    const int S = sim.substeps < 0 ? mpc.substeps : sim.substeps;
    const int K = sim.steps(mpc.Ts);
    const double h = mpc.Ts / S;
    const int meas_every = S / sim.n_m;

    SimLog log;
    log.theta_true = sim.theta_true;
    log.seed = sim.seed;
    log.adaptation = sim.adaptation;
    log.rigid = sim.rigid;

    std::mt19937_64 rng(sim.seed);
    const ChebyshevBasis basis(mpc.geodesic.degree, mpc.geodesic.quad_points);
    Feedback fb{ccm, basis, mpc.geodesic, Mat(), 0};

    if (mpc.rigid && mpc.rigid_delta < 0.0) {
        // one sampled scaling for the whole run
        const Vec th = mpc.rigid_theta_bar.size() ? mpc.rigid_theta_bar : Vec(0.5 * (bounding_box(sys.Theta0).first +
                                                                                     bounding_box(sys.Theta0).second));
        mpc.rigid_theta_bar = th;
        mpc.rigid_delta = rigid_tube_delta(sys, ccm, consts, sys.Theta0, th, mpc.delta_floor);
    }
    log.rigid_delta = mpc.rigid ? mpc.rigid_delta : 0.0;

    Vec x = sim.x0;
    Polytope Theta = with_vertices(sys.Theta0);
    std::vector<Polytope> deltas;
    std::optional<MPCSolution> prev;

    for (int k = 0; k < K; ++k) {
        const double t = k * mpc.Ts;
        SimStep st;
        st.k = k;
        st.t = t;
        st.x = x;

        if (k > 0 && sim.adaptation && sys.p > 0) {
            try {
                Polytope next = update_parameter_set(Theta, deltas);
                st.theta_nested = contained_in(next, Theta, 1e-9);
                Theta = std::move(next);
            } catch (const EstimationInconsistent& e) {
                log.status = SimStatus::EstimationFailed;
                log.message = std::string("parameter update failed at step ") + std::to_string(k) + ": " + e.what();
                break;
            }
        }
        deltas.clear();
        st.Theta = Theta;
        st.theta_size = sys.p > 0 ? parameter_set_size(Theta) : 0.0;
        st.theta_true_in = sys.p == 0 || Theta.contains(sim.theta_true, 1e-9);

        const auto t0 = Clock::now();
        const auto ocp = build_ocp(sys, ccm, consts, x, Theta, mpc, terminal);
        std::optional<MPCSolution> cand;
        if (prev) {
            try {
                cand = shift_candidate(*ocp, *prev);
                st.candidate = evaluate_candidate(*ocp, *cand, *prev, mpc.check_tol);
            } catch (const GeodesicError&) {
                st.candidate.available = false;
            }
        }

        MPCSolution sol;
        double sqp_cost = std::numeric_limits<double>::quiet_NaN();
        bool sqp_ok = false;
        {
            MPCSolution s;
            if (!prev || sim.multistart_every_step) {
                s = (!sim.paths.empty() && (!prev || sim.multistart_every_step))
                        ? solve_ocp_multistart(*ocp, sim.paths, mpc.position_idx)
                        : solve_ocp(*ocp);
                if (cand && cand->cost < s.cost) {
                    // the warm start may reach a better local minimum
                    MPCSolution w = solve_ocp(*ocp, cand);
                    if (w.status == SolveStatus::Converged && ocp->check(ocp->encode(w)).pass(mpc.check_tol) &&
                        (s.status != SolveStatus::Converged || w.cost < s.cost))
                        s = w;
                }
            } else {
                s = solve_ocp(*ocp, cand);
            }
            const OCPCheck chk = ocp->check(ocp->encode(s));
            s.violation = std::max({chk.max_eq, chk.max_in, chk.max_bound});
            sqp_cost = s.cost;
            sqp_ok = s.status == SolveStatus::Converged && chk.pass(mpc.check_tol);
            st.status = s.status;
            st.iterations = s.iterations;
            const bool cand_ok = cand && st.candidate.feasible;
            if (sqp_ok && (!cand_ok || s.cost <= cand->cost + sim.cost_tol * (1.0 + std::abs(cand->cost)))) {
                sol = std::move(s);
            } else if (cand_ok) {
                sol = *cand;
                sol.from_candidate = true;
            } else if (chk.pass(mpc.check_tol)) {
                sol = std::move(s); // not converged but feasible
            } else {
                log.status = k == 0 ? SimStatus::InitialInfeasible : SimStatus::Infeasible;
                log.message = "no feasible solution at step " + std::to_string(k) + " (solver " +
                              to_string(s.status) + ", worst " + chk.worst + ")";
                st.solve_time = seconds_since(t0);
                log.steps.push_back(std::move(st));
                break;
            }
        }
        st.solve_time = seconds_since(t0);
        st.sqp_cost = sqp_cost;
        st.from_candidate = sol.from_candidate;
        st.cost = sol.cost;
        st.stage_cost = sol.stage_cost(0);
        st.theta_bar = sol.theta_bar;
        st.delta_f_bar = sol.delta_f_bar;
        st.z = sol.z;
        st.delta = sol.delta;
        st.v0 = sol.v.row(0).transpose();
        st.solution = ocp->encode(sol);
        if (prev) st.cost_decrease = sol.cost - (prev->cost - prev->stage_cost(0));
        {
            const ReferencePoint ref = reference_point(terminal.reference, sol.theta_bar);
            Vec e(sys.n + sys.m);
            e << sol.z.row(0).transpose() - ref.z, st.v0 - ref.v;
            st.tracking_error = e.norm();
        }

        // truth and nominal over one period
        Vec z = sol.z.row(0).transpose();
        const Vec v = st.v0;
        const Vec& th = sol.theta_bar;
        st.v_delta = fb.curve(x, z).length;
        const int fail0 = fb.failures;
        for (int s = 0; s < S; ++s) {
            const Vec d = zero_or_sample(sys.D, sys.q, sim.disturbance, rng);
            Vec u = fb.kappa(x, z, v);
            if (s == 0) {
                st.u = u;
                st.constraint_margin = sys.r() > 0 ? eval_constraints(sys, x, u).maxCoeff() : -1.0;
            }
            if (s % meas_every == 0 && sys.p > 0) {
                const Vec eps = zero_or_sample(sys.D_eps, sys.n, sim.disturbance, rng);
                deltas.push_back(nonfalsified_set(sys, {t + s * h, x, u, measure_derivative(sys, x, u, sim.theta_true, d, eps)}));
            }
            log.fine.push_back({t + s * h, x, z, u});
            // joint RK4 of the truth under kappa and the nominal model
            auto fx = [&](const Vec& xs, const Vec& zs, const Vec* u0) {
                const Vec us = u0 ? *u0 : fb.kappa(xs, zs, v);
                return eval_dynamics(sys, xs, us, sim.theta_true, d);
            };
            const Vec kx1 = fx(x, z, &u);
            const Vec kz1 = eval_nominal(sys, z, v, th);
            const Vec kx2 = fx(x + 0.5 * h * kx1, z + 0.5 * h * kz1, nullptr);
            const Vec kz2 = eval_nominal(sys, z + 0.5 * h * kz1, v, th);
            const Vec kx3 = fx(x + 0.5 * h * kx2, z + 0.5 * h * kz2, nullptr);
            const Vec kz3 = eval_nominal(sys, z + 0.5 * h * kz2, v, th);
            const Vec kx4 = fx(x + h * kx3, z + h * kz3, nullptr);
            const Vec kz4 = eval_nominal(sys, z + h * kz3, v, th);
            x += h / 6.0 * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
            z += h / 6.0 * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4);
            if (!x.allFinite()) throw IntegrationError("truth integration diverged", k * S + s);
        }
        st.v_delta_end = fb.curve(x, z).length;
        st.containment_margin = st.v_delta_end - sol.delta(1);
        st.geodesic_failures = fb.failures - fail0;
        log.steps.push_back(std::move(st));
        prev = std::move(sol);
    }
    log.fine.push_back({K * mpc.Ts, x, prev ? Vec(prev->z.row(1).transpose()) : x, Vec()});
    return log;
}

AuditReport audit_containment(const SimLog& log, double tol)
{
    AuditReport r;
    r.steps = static_cast<int>(log.steps.size());
    for (const auto& s : log.steps) {
        if (s.delta.size() < 2) continue;
        const double c = s.v_delta_end - s.delta(1);
        const double i = s.v_delta - s.delta(0);
        r.worst_containment = std::max(r.worst_containment, c);
        r.worst_initial = std::max(r.worst_initial, i);
        r.worst_constraint = std::max(r.worst_constraint, s.constraint_margin);
        if (c > tol) r.failures.push_back("step " + std::to_string(s.k) + ": V_delta " + std::to_string(s.v_delta_end) +
                                          " exceeds delta " + std::to_string(s.delta(1)));
        if (i > tol) r.failures.push_back("step " + std::to_string(s.k) + ": initial V_delta exceeds delta_0");
        if (s.constraint_margin > tol) r.failures.push_back("step " + std::to_string(s.k) + ": constraint violated");
        if (!s.theta_true_in || !s.theta_nested) {
            ++r.theta_failures;
            r.failures.push_back("step " + std::to_string(s.k) + ": parameter set check failed");
        }
    }
    r.pass = r.failures.empty();
    return r;
}

namespace {

std::vector<std::string> names_or_default(const std::vector<std::string>& names, int n, const char* prefix)
{
    if (static_cast<int>(names.size()) == n) return names;
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(std::string(prefix) + std::to_string(i));
    return out;
}

} // namespace

void write_sim_csv(const std::string& path, const SimLog& log, const std::vector<std::string>& state_names)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    if (log.steps.empty()) return;
    const int n = static_cast<int>(log.steps.front().x.size());
    const int m = static_cast<int>(log.steps.front().u.size());
    const auto xn = names_or_default(state_names, n, "x");
    out << "k,t";
    for (const auto& s : xn) out << ',' << s;
    for (int j = 0; j < m; ++j) out << ",u" << j;
    out << ",cost,stage_cost,solver,from_candidate,iterations,solve_time,candidate_feasible,candidate_violation,"
           "cost_decrease,delta0,delta1,delta_f_bar,v_delta,v_delta_end,containment_margin,constraint_margin,"
           "theta_size,tracking_error\n";
    out << std::setprecision(12);
    for (const auto& s : log.steps) {
        out << s.k << ',' << s.t;
        for (int i = 0; i < n; ++i) out << ',' << s.x(i);
        for (int j = 0; j < m; ++j) out << ',' << (s.u.size() ? s.u(j) : 0.0);
        const double d0 = s.delta.size() ? s.delta(0) : 0.0, d1 = s.delta.size() > 1 ? s.delta(1) : 0.0;
        out << ',' << s.cost << ',' << s.stage_cost << ',' << to_string(s.status) << ',' << s.from_candidate << ','
            << s.iterations << ',' << s.solve_time << ',' << s.candidate.feasible << ',' << s.candidate.violation << ','
            << s.cost_decrease << ',' << d0 << ',' << d1 << ',' << s.delta_f_bar << ',' << s.v_delta << ','
            << s.v_delta_end << ',' << s.containment_margin << ',' << s.constraint_margin << ',' << s.theta_size
            << ',' << s.tracking_error << '\n';
    }
}

void write_fine_csv(const std::string& path, const SimLog& log, const std::vector<std::string>& state_names)
{
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    if (log.fine.empty()) return;
    const int n = static_cast<int>(log.fine.front().x.size());
    const auto xn = names_or_default(state_names, n, "x");
    out << "t";
    for (const auto& s : xn) out << ',' << s;
    for (const auto& s : xn) out << ",z_" << s;
    out << '\n' << std::setprecision(12);
    for (const auto& f : log.fine) {
        out << f.t;
        for (int i = 0; i < n; ++i) out << ',' << f.x(i);
        for (int i = 0; i < n; ++i) out << ',' << f.z(i);
        out << '\n';
    }
}

json sim_to_json(const SimLog& log, const CCM& ccm)
{
    json j;
    j["status"] = to_string(log.status);
    j["message"] = log.message;
    j["seed"] = log.seed;
    j["adaptation"] = log.adaptation;
    j["rigid"] = log.rigid;
    j["rigid_delta"] = log.rigid_delta;
    j["theta_true"] = to_json(log.theta_true);
    j["total_cost"] = log.total_cost();
    // tube cross-sections: {x : (x - z)^T M_lower (x - z) <= delta^2}
    Mat Minv;
    if (ccm.has_bounds()) Minv = ccm.M_lower.inverse();
    j["M_lower_inverse"] = Minv.size() ? mat_to_json(Minv) : json::array();
    json steps = json::array();
    for (const auto& s : log.steps) {
        json e;
        e["k"] = s.k;
        e["t"] = s.t;
        e["x"] = to_json(s.x);
        e["u"] = to_json(s.u);
        e["Theta"] = to_json(s.Theta);
        e["theta_size"] = s.theta_size;
        e["solver"] = to_string(s.status);
        e["from_candidate"] = s.from_candidate;
        e["iterations"] = s.iterations;
        e["solve_time"] = s.solve_time;
        e["cost"] = s.cost;
        e["sqp_cost"] = std::isfinite(s.sqp_cost) ? json(s.sqp_cost) : json(nullptr);
        e["stage_cost"] = s.stage_cost;
        e["cost_decrease"] = s.cost_decrease;
        e["theta_bar"] = to_json(s.theta_bar);
        e["delta_f_bar"] = s.delta_f_bar;
        e["z"] = mat_to_json(s.z);
        e["delta"] = to_json(s.delta);
        e["v0"] = to_json(s.v0);
        e["v_delta"] = s.v_delta;
        e["v_delta_end"] = s.v_delta_end;
        e["containment_margin"] = s.containment_margin;
        e["constraint_margin"] = s.constraint_margin;
        e["tracking_error"] = s.tracking_error;
        e["candidate"] = {{"available", s.candidate.available}, {"feasible", s.candidate.feasible},
                          {"violation", s.candidate.violation}, {"worst", s.candidate.worst},
                          {"cost", s.candidate.cost}, {"nesting", s.candidate.nesting},
                          {"cost_excess", s.candidate.cost_excess}};
        steps.push_back(std::move(e));
    }
    j["steps"] = std::move(steps);
    return j;
}

} // namespace rampc
