// rampc: command-line front end.
// exit codes: 0 ok, 1 check failed, 2 usage/input, 3 runtime infeasibility

#include "rampc/ccm_verify.hpp"
#include "rampc/config.hpp"
#include "rampc/geodesic.hpp"
#include "rampc/polytope_ops.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

using namespace rampc;
namespace fs = std::filesystem;

namespace {

enum Exit { Ok = 0, CheckFailed = 1, Usage = 2, Infeasible = 3 };

struct Args {
    std::string config;
    std::string out;
    std::int64_t seed = -1; // config value when negative
    int jobs = 1;
    bool rigid = false;
    bool no_adaptation = false;
};

std::string out_dir(const Args& a, const std::string& cmd) { return a.out.empty() ? "out/" + cmd : a.out; }

RunManifest manifest(const RunConfig& rc, const std::string& cmd, std::uint64_t seed, const std::string& dir)
{
    RunManifest m;
    m.config_path = rc.path;
    m.command = cmd;
    m.seed = seed;
    m.out_dir = dir;
    m.version = toolkit_version();
    m.input_hash = hash_files(rc.input_files);
    return m;
}

json sample_json(const Vec& v) { return v.size() ? to_json(v) : json::array(); }

int cmd_verify(const RunConfig& rc, const Args& a)
{
    const std::string dir = out_dir(a, "verify-ccm");
    write_manifest(dir, manifest(rc, "verify-ccm", 0, dir));
    const auto rep = verify_ccm(rc.sys, rc.ccm, rc.samples, rc.verify_tol);
    json j = {{"result", rep.pass ? "PASS" : "FAIL"},
              {"worst_eig", rep.worst_eig},
              {"worst_normalized", rep.worst_normalized},
              {"tol_rel", rep.tol_rel},
              {"num_samples", rep.num_samples},
              {"num_checks", rep.num_checks},
              {"M_eig_min", rep.M_eig_min},
              {"M_eig_max", rep.M_eig_max},
              {"non_spd", rep.non_spd},
              {"worst_sample",
               {{"x", sample_json(rep.worst_x)},
                {"u", sample_json(rep.worst_u)},
                {"theta", sample_json(rep.worst_theta)},
                {"d", sample_json(rep.worst_d)}}}};
    write_json_file(dir + "/verification.json", j);
    std::printf("%s  worst normalized residual %.3e over %zu samples\n", rep.pass ? "PASS" : "FAIL",
                rep.worst_normalized, rep.num_samples);
    if (!rep.pass) std::printf("worst sample: %s\n", j["worst_sample"].dump().c_str());
    return rep.pass ? Ok : CheckFailed;
}

int cmd_constants(const RunConfig& rc, const Args& a)
{
    const std::string dir = out_dir(a, "constants");
    write_manifest(dir, manifest(rc, "constants", rc.samples.skip, dir));
    const auto samples = generate_samples(rc.sys, rc.samples);
    const TubeConstants c = compute_tube_constants(rc.sys, rc.ccm, samples, rc.constants_options);
    json j = to_json(c);
    json names = json::array();
    for (const auto& h : rc.sys.constraints) names.push_back(h.name);
    j["constraint_names"] = names;
    write_json_file(dir + "/constants.json", j);
    std::printf("rho_c %.6g  L_D %.6g  lambda %.6g  (%zu samples, safety %.3g)\n", c.rho_c, c.L_D, c.lambda(),
                c.num_samples, c.safety_factor);
    if (!c.contractive()) {
        std::printf("not contractive: rho_c <= L_D\n");
        return CheckFailed;
    }
    return Ok;
}

int cmd_geodesic(const RunConfig& rc, const Args& a)
{
    const auto& q = rc.geodesic_query;
    if (!q.contains("x") || !q.contains("z")) throw InputError("geodesic needs geodesic_query.x and .z");
    reject_unknown(q, {"x", "z"}, "geodesic_query");
    const Vec x = vec_from_json(q.at("x"));
    const Vec z = vec_from_json(q.at("z"));
    if (x.size() != rc.sys.n || z.size() != rc.sys.n) throw InputError("geodesic_query: wrong dimension");
    const std::string dir = out_dir(a, "geodesic");
    write_manifest(dir, manifest(rc, "geodesic", 0, dir));
    const auto curve = solve_geodesic(rc.ccm, x, z, rc.mpc.geodesic);
    json j = {{"length", curve.length},         {"energy", curve.energy},
              {"arc_length", curve.arc_length}, {"iterations", curve.iterations},
              {"converged", curve.converged},   {"nodes", to_json(curve.nodes)},
              {"values", mat_to_json(curve.values)}, {"derivatives", mat_to_json(curve.derivs)}};
    write_json_file(dir + "/geodesic.json", j);
    std::printf("V_delta %.10g  energy %.10g  iterations %d%s\n", curve.length, curve.energy, curve.iterations,
                curve.converged ? "" : "  (not converged)");
    return curve.converged ? Ok : CheckFailed;
}

json solution_json(const MPCSolution& s, const OCPCheck& chk)
{
    return {{"status", to_string(s.status)},
            {"cost", s.cost},
            {"iterations", s.iterations},
            {"violation", s.violation},
            {"worst_row", chk.worst},
            {"max_eq", chk.max_eq},
            {"max_in", chk.max_in},
            {"z", mat_to_json(s.z)},
            {"z_fine", mat_to_json(s.z_fine)},
            {"v", mat_to_json(s.v)},
            {"delta", to_json(s.delta)},
            {"theta_bar", to_json(s.theta_bar)},
            {"delta_f_bar", s.delta_f_bar},
            {"w_bar", to_json(s.w_bar)},
            {"stage_cost", to_json(s.stage_cost)}};
}

int cmd_solve(const RunConfig& rc, const Args& a)
{
    const std::string dir = out_dir(a, "solve-ocp");
    write_manifest(dir, manifest(rc, "solve-ocp", 0, dir));
    const TubeConstants consts = rc.tube_constants();
    MPCConfig mpc = rc.mpc;
    mpc.rigid = a.rigid || rc.sim.rigid;
    const auto ocp = build_ocp(rc.sys, rc.ccm, consts, rc.sim.x0, with_vertices(rc.sys.Theta0), mpc, rc.terminal);
    const auto t0 = std::chrono::steady_clock::now();
    const MPCSolution s = solve_ocp_multistart(*ocp, rc.sim.paths, mpc.position_idx);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const OCPCheck chk = ocp->check(ocp->encode(s));
    const bool ok = s.status == SolveStatus::Converged && chk.pass(mpc.check_tol);
    json j = solution_json(s, chk);
    j["feasible"] = ok;
    j["solve_time"] = secs;
    j["rigid"] = mpc.rigid;
    if (mpc.rigid) j["rigid_delta"] = ocp->rigid_delta();
    write_json_file(dir + "/solution.json", j);
    std::printf("%s  status %s  cost %.6g  violation %.2e  %d iterations  %.2f s\n", ok ? "Feasible" : "Infeasible",
                to_string(s.status).c_str(), s.cost, s.violation, s.iterations, secs);
    if (!ok) std::printf("worst row: %s\n", chk.worst.c_str());
    return ok ? Ok : Infeasible;
}

struct RunResult {
    SimLog log;
    AuditReport audit;
};

void write_run(const std::string& dir, const RunConfig& rc, const RunResult& r)
{
    fs::create_directories(dir);
    write_sim_csv(dir + "/steps.csv", r.log, rc.sys.state_names);
    write_fine_csv(dir + "/trajectory.csv", r.log, rc.sys.state_names);
    write_json_file(dir + "/plot_data.json", sim_to_json(r.log, rc.ccm));
    std::vector<double> times;
    std::vector<Polytope> hist;
    for (const auto& s : r.log.steps) {
        times.push_back(s.t);
        hist.push_back(s.Theta);
    }
    write_parameter_history(dir + "/parameter_sets.csv", times, hist);
    json f = json::array();
    for (const auto& m : r.audit.failures) f.push_back(m);
    write_json_file(dir + "/audit.json", {{"pass", r.audit.pass},
                                          {"steps", r.audit.steps},
                                          {"worst_containment", r.audit.worst_containment},
                                          {"worst_constraint", r.audit.worst_constraint},
                                          {"worst_initial", r.audit.worst_initial},
                                          {"theta_failures", r.audit.theta_failures},
                                          {"failures", f}});
}

int cmd_simulate(const RunConfig& rc, const Args& a)
{
    const std::string dir = out_dir(a, "simulate");
    const std::uint64_t seed0 = a.seed >= 0 ? static_cast<std::uint64_t>(a.seed) : rc.sim.seed;
    write_manifest(dir, manifest(rc, "simulate", seed0, dir));
    const TubeConstants consts = rc.tube_constants();
    SimConfig sim = rc.sim;
    if (a.rigid) sim.rigid = true;
    if (a.no_adaptation) sim.adaptation = false;

    const int runs = rc.sim_runs;
    std::vector<RunResult> results(runs);
    std::atomic<int> next{0};
    std::mutex io;
    auto worker = [&] {
        for (int i = next++; i < runs; i = next++) {
            SimConfig s = sim;
            s.seed = seed0 + i;
            results[i].log = run_closed_loop(rc.sys, rc.ccm, consts, rc.mpc, rc.terminal, s);
            results[i].audit = audit_containment(results[i].log);
            std::lock_guard lk(io);
            std::printf("seed %llu: %s, %zu steps, cost %.6g, audit %s\n", static_cast<unsigned long long>(s.seed),
                        to_string(results[i].log.status).c_str(), results[i].log.steps.size(),
                        results[i].log.total_cost(), results[i].audit.pass ? "pass" : "FAIL");
            std::fflush(stdout);
        }
    };
    const int jobs = std::clamp(a.jobs, 1, runs);
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int code = Ok;
    json summary = json::array();
    for (int i = 0; i < runs; ++i) {
        const auto& r = results[i];
        write_run(runs == 1 ? dir : dir + "/seed_" + std::to_string(seed0 + i), rc, r);
        summary.push_back({{"seed", r.log.seed},
                           {"status", to_string(r.log.status)},
                           {"message", r.log.message},
                           {"steps", r.log.steps.size()},
                           {"total_cost", r.log.total_cost()},
                           {"audit", r.audit.pass}});
        if (r.log.status == SimStatus::Completed) {
            if (!r.audit.pass && code == Ok) code = CheckFailed;
        } else {
            if (!r.log.message.empty()) std::fprintf(stderr, "seed %llu: %s\n",
                                                     static_cast<unsigned long long>(r.log.seed), r.log.message.c_str());
            code = r.log.status == SimStatus::EstimationFailed ? CheckFailed : Infeasible;
        }
    }
    write_json_file(dir + "/summary.json",
                    {{"adaptation", sim.adaptation}, {"rigid", sim.rigid}, {"runs", summary}});
    return code;
}

int cmd_estimate(const RunConfig& rc, const Args& a)
{
    const auto& e = rc.estimate_demo;
    const int steps = e.value("steps", 20);
    const std::uint64_t seed = a.seed >= 0 ? static_cast<std::uint64_t>(a.seed) : e.value("seed", std::uint64_t{0});
    const Vec theta_true = e.contains("theta_true") ? vec_from_json(e.at("theta_true")) : rc.sim.theta_true;
    if (theta_true.size() != rc.sys.p || !rc.sys.Theta0.contains(theta_true, 1e-12))
        throw InputError("estimate_demo: theta_true must lie in Theta_0");
    const std::string dir = out_dir(a, "estimate-demo");
    write_manifest(dir, manifest(rc, "estimate-demo", seed, dir));

    // measurements at uniformly drawn (x, u) from the sampling box
    std::mt19937_64 rng(seed);
    const Polytope box = Polytope::box(rc.sys.sample_lo, rc.sys.sample_hi);
    Polytope Theta = with_vertices(rc.sys.Theta0);
    std::vector<double> times{0.0};
    std::vector<Polytope> hist{Theta};
    bool ok = true;
    for (int k = 1; k <= steps; ++k) {
        const Vec xu = sample_uniform(box, rng);
        const Vec x = xu.head(rc.sys.n), u = xu.tail(rc.sys.m);
        const Vec d = sample_uniform(rc.sys.D, rng);
        const Vec eps = sample_uniform(rc.sys.D_eps, rng);
        Measurement m{static_cast<double>(k), x, u, measure_derivative(rc.sys, x, u, theta_true, d, eps)};
        const Polytope next = update_parameter_set(Theta, {nonfalsified_set(rc.sys, m)});
        const bool in = next.contains(theta_true, 1e-9);
        const bool nested = contained_in(next, Theta, 1e-9);
        ok = ok && in && nested;
        Theta = next;
        times.push_back(k);
        hist.push_back(Theta);
    }
    write_parameter_history(dir + "/parameter_sets.csv", times, hist);
    write_json_file(dir + "/estimate.json", {{"steps", steps},
                                             {"seed", seed},
                                             {"theta_true", to_json(theta_true)},
                                             {"size_initial", parameter_set_size(hist.front())},
                                             {"size_final", parameter_set_size(Theta)},
                                             {"final_set", to_json(Theta)},
                                             {"consistent", ok}});
    std::printf("size %.6g -> %.6g after %d updates; truth kept and sets nested: %s\n", parameter_set_size(hist.front()),
                parameter_set_size(Theta), steps, ok ? "yes" : "NO");
    return ok ? Ok : CheckFailed;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"robust adaptive MPC with contraction metrics"};
    app.require_subcommand(1);
    Args a;
    app.add_option("--config", a.config, "run configuration JSON")->required()->check(CLI::ExistingFile);
    app.add_option("--out", a.out, "output directory (default out/<command>)");
    app.add_option("--seed", a.seed, "seed override");
    app.add_option("--jobs", a.jobs, "parallel Monte Carlo runs")->check(CLI::PositiveNumber);
    app.add_flag("--rigid-tube", a.rigid, "constant tube scaling");
    app.add_flag("--no-adaptation", a.no_adaptation, "keep Theta_0 throughout");
    app.fallthrough();

    struct Cmd {
        const char* name;
        const char* help;
        int (*fn)(const RunConfig&, const Args&);
    };
    const std::vector<Cmd> cmds = {
        {"verify-ccm", "re-check the contraction certificate on the configured samples", cmd_verify},
        {"constants", "tube constants and tightening coefficients", cmd_constants},
        {"geodesic", "geodesic and feedback for geodesic_query", cmd_geodesic},
        {"solve-ocp", "one optimal control problem from the configured x0", cmd_solve},
        {"simulate", "closed-loop runs with containment audit", cmd_simulate},
        {"estimate-demo", "set-membership updates on random measurements", cmd_estimate}};
    std::vector<CLI::App*> subs;
    for (const auto& c : cmds) subs.push_back(app.add_subcommand(c.name, c.help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Ok : Usage;
    }

    try {
        const RunConfig rc = load_run_config(a.config);
        for (std::size_t i = 0; i < cmds.size(); ++i)
            if (subs[i]->parsed()) return cmds[i].fn(rc, a);
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return Usage;
    } catch (const ContractViolation& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return Usage;
    } catch (const CCMDomainError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return Usage;
    } catch (const RigidTubeInfeasible& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return Infeasible;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return Infeasible;
    }
    return Usage;
}
