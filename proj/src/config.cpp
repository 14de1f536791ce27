#include "rampc/config.hpp"
#include "rampc/polytope_ops.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

namespace rampc {

namespace {

namespace fs = std::filesystem;

std::string resolve(const std::string& base, const std::string& file)
{
    const fs::path p(file);
    return p.is_absolute() ? file : (fs::path(base) / p).lexically_normal().string();
}

SampleSpec samples_from_json(const json& j)
{
    reject_unknown(j, {"kind", "count", "grid_points", "skip", "filter"}, "samples");
    SampleSpec s;
    const std::string kind = j.value("kind", "halton");
    if (kind == "halton") s.kind = SampleSpec::Kind::Halton;
    else if (kind == "grid") s.kind = SampleSpec::Kind::Grid;
    else throw InputError("samples: unknown kind '" + kind + "'");
    s.count = j.value("count", s.count);
    s.grid_points = j.value("grid_points", s.grid_points);
    s.skip = j.value("skip", s.skip);
    s.filter = j.value("filter", s.filter);
    if (s.count < 1 || s.grid_points < 1) throw InputError("samples: counts must be positive");
    return s;
}

ConstantsOptions constants_options_from_json(const json& j)
{
    reject_unknown(j, {"safety_factor", "refine_fraction", "refine_iters"}, "constants");
    ConstantsOptions o;
    o.safety_factor = j.value("safety_factor", o.safety_factor);
    o.refine_fraction = j.value("refine_fraction", o.refine_fraction);
    o.refine_iters = j.value("refine_iters", o.refine_iters);
    if (o.safety_factor < 1.0) throw InputError("constants: safety_factor must be at least 1");
    return o;
}

GeodesicOptions geodesic_from_json(const json& j)
{
    reject_unknown(j, {"degree", "quad_points", "grad_tol", "max_iter"}, "geodesic");
    GeodesicOptions g;
    g.degree = j.value("degree", g.degree);
    g.quad_points = j.value("quad_points", g.quad_points);
    g.grad_tol = j.value("grad_tol", g.grad_tol);
    g.max_iter = j.value("max_iter", g.max_iter);
    return g;
}

SQPOptions solver_from_json(const json& j)
{
    reject_unknown(j, {"max_iter", "kkt_tol", "feas_tol", "step_tol", "restoration_iter", "base_shift"}, "solver");
    SQPOptions s;
    s.max_iter = j.value("max_iter", s.max_iter);
    s.kkt_tol = j.value("kkt_tol", s.kkt_tol);
    s.feas_tol = j.value("feas_tol", s.feas_tol);
    s.step_tol = j.value("step_tol", s.step_tol);
    s.restoration_iter = j.value("restoration_iter", s.restoration_iter);
    s.base_shift = j.value("base_shift", s.base_shift);
    return s;
}

MPCConfig mpc_from_json(const json& j, int n, int m)
{
    reject_unknown(j,
                   {"N", "Ts", "Q", "R", "substeps", "geodesic", "solver", "check_tol", "position_idx", "rigid_delta",
                    "rigid_theta_bar", "delta_floor"},
                   "mpc");
    MPCConfig c;
    c.N = j.value("N", c.N);
    c.Ts = j.value("Ts", c.Ts);
    if (j.contains("Q")) c.Q = mat_from_json(j.at("Q"));
    if (j.contains("R")) c.R = mat_from_json(j.at("R"));
    c.substeps = j.value("substeps", c.substeps);
    if (j.contains("geodesic")) c.geodesic = geodesic_from_json(j.at("geodesic"));
    if (j.contains("solver")) c.solver = solver_from_json(j.at("solver"));
    c.check_tol = j.value("check_tol", c.check_tol);
    if (j.contains("position_idx")) c.position_idx = j.at("position_idx").get<std::vector<int>>();
    c.rigid_delta = j.value("rigid_delta", c.rigid_delta);
    if (j.contains("rigid_theta_bar")) c.rigid_theta_bar = vec_from_json(j.at("rigid_theta_bar"));
    c.delta_floor = j.value("delta_floor", c.delta_floor);
    for (int i : c.position_idx)
        if (i < 0 || i >= n) throw InputError("mpc: position_idx out of range");
    try {
        c.prepare(n, m);
    } catch (const ContractViolation& e) {
        throw InputError(e.what());
    }
    return c;
}

TerminalSpec reference_from_json(const json& j, const UncertainSystem& sys)
{
    const std::string type = j.value("type", "quadrotor");
    if (type == "quadrotor") {
        reject_unknown(j, {"type", "g"}, "reference");
        return {quadrotor_reference(j.value("g", 9.81))};
    }
    if (type == "steady_state") {
        reject_unknown(j, {"type", "C", "D", "y_d", "z_guess", "v_guess"}, "reference");
        const Mat C = mat_from_json(j.at("C"));
        const Mat D = j.contains("D") ? mat_from_json(j.at("D")) : Mat::Zero(C.rows(), sys.m);
        const Vec zg = j.contains("z_guess") ? vec_from_json(j.at("z_guess")) : Vec::Zero(sys.n);
        const Vec vg = j.contains("v_guess") ? vec_from_json(j.at("v_guess")) : Vec::Zero(sys.m);
        return {steady_state_reference(sys, C, D, vec_from_json(j.at("y_d")), zg, vg)};
    }
    throw InputError("reference: unknown type '" + type + "'");
}

std::vector<std::vector<Vec>> paths_from_json(const json& j)
{
    std::vector<std::vector<Vec>> out;
    if (!j.is_array()) throw InputError("simulation.paths must be a list of waypoint lists");
    for (const auto& path : j) {
        std::vector<Vec> wp;
        for (const auto& p : path) wp.push_back(vec_from_json(p));
        out.push_back(std::move(wp));
    }
    return out;
}

SimConfig sim_from_json(const json& j, const UncertainSystem& sys)
{
    reject_unknown(j,
                   {"duration", "seed", "n_m", "substeps", "adaptation", "rigid", "theta_true", "x0", "disturbance",
                    "paths", "multistart_every_step", "cost_tol", "runs"},
                   "simulation");
    SimConfig s;
    s.duration = j.value("duration", s.duration);
    s.seed = j.value("seed", s.seed);
    s.n_m = j.value("n_m", s.n_m);
    s.substeps = j.value("substeps", s.substeps);
    s.adaptation = j.value("adaptation", s.adaptation);
    s.rigid = j.value("rigid", s.rigid);
    s.x0 = j.contains("x0") ? vec_from_json(j.at("x0")) : Vec::Zero(sys.n);
    if (j.contains("theta_true")) {
        s.theta_true = vec_from_json(j.at("theta_true"));
    } else if (sys.p > 0) {
        const auto [lo, hi] = bounding_box(sys.Theta0);
        s.theta_true = 0.5 * (lo + hi);
    } else {
        s.theta_true = Vec(0);
    }
    s.disturbance = j.value("disturbance", s.disturbance);
    if (j.contains("paths")) s.paths = paths_from_json(j.at("paths"));
    s.multistart_every_step = j.value("multistart_every_step", s.multistart_every_step);
    s.cost_tol = j.value("cost_tol", s.cost_tol);
    return s;
}

} // namespace

TubeConstants RunConfig::tube_constants() const
{
    if (constants) return *constants;
    return compute_tube_constants(sys, ccm, generate_samples(sys, samples), constants_options);
}

RunConfig load_run_config(const std::string& path)
{
    RunConfig rc;
    rc.path = path;
    rc.base_dir = fs::path(path).parent_path().string();
    rc.raw = read_json_file(path);
    rc.input_files.push_back(path);
    const json& j = rc.raw;
    try {
        reject_unknown(j,
                       {"description", "system", "system_file", "ccm_file", "constants_file", "samples", "constants",
                        "mpc", "reference", "simulation", "verify", "geodesic_query", "estimate_demo"},
                       "config");
        if (j.contains("system") == j.contains("system_file"))
            throw InputError("config: give exactly one of 'system' and 'system_file'");
        if (j.contains("system")) {
            rc.sys = system_from_json(j.at("system"));
        } else {
            const std::string sp = resolve(rc.base_dir, j.at("system_file").get<std::string>());
            rc.sys = system_from_json(read_json_file(sp));
            rc.input_files.push_back(sp);
        }
        if (!j.contains("ccm_file")) throw InputError("config: 'ccm_file' is required");
        rc.ccm_path = resolve(rc.base_dir, j.at("ccm_file").get<std::string>());
        rc.ccm = ccm_from_json(read_json_file(rc.ccm_path));
        rc.input_files.push_back(rc.ccm_path);
        if (rc.ccm.n() != rc.sys.n || rc.ccm.m() != rc.sys.m)
            throw InputError("config: CCM dimensions do not match the system");
        if (j.contains("samples")) rc.samples = samples_from_json(j.at("samples"));
        if (j.contains("constants")) rc.constants_options = constants_options_from_json(j.at("constants"));
        if (j.contains("constants_file")) {
            const std::string cp = resolve(rc.base_dir, j.at("constants_file").get<std::string>());
            rc.constants = tube_constants_from_json(read_json_file(cp));
            rc.input_files.push_back(cp);
            if (rc.constants->c.size() != rc.sys.r() || rc.constants->L_G.size() != rc.sys.p)
                throw InputError("config: constants file does not match the system");
        }
        rc.mpc = mpc_from_json(j.value("mpc", json::object()), rc.sys.n, rc.sys.m);
        rc.terminal = reference_from_json(j.value("reference", json::object()), rc.sys);
        const json sj = j.value("simulation", json::object());
        rc.sim = sim_from_json(sj, rc.sys);
        rc.sim_runs = sj.value("runs", 1);
        if (rc.sim_runs < 1) throw InputError("simulation: runs must be positive");
        if (j.contains("verify")) {
            reject_unknown(j.at("verify"), {"tol"}, "verify");
            rc.verify_tol = j.at("verify").value("tol", rc.verify_tol);
        }
        rc.geodesic_query = j.value("geodesic_query", json::object());
        rc.estimate_demo = j.value("estimate_demo", json::object());
        reject_unknown(rc.estimate_demo, {"steps", "seed", "theta_true"}, "estimate_demo");
        try {
            rc.sim.validate(rc.sys, rc.mpc);
        } catch (const ContractViolation& e) {
            throw InputError(e.what());
        }
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    return rc;
}

json to_json(const TubeConstants& c)
{
    return {{"rho_c", c.rho_c},     {"L_D", c.L_D},
            {"L_G", to_json(c.L_G)}, {"c", to_json(c.c)},
            {"lambda", c.lambda()},  {"safety_factor", c.safety_factor},
            {"num_samples", c.num_samples}};
}

TubeConstants tube_constants_from_json(const json& j)
{
    try {
        reject_unknown(j, {"rho_c", "L_D", "L_G", "c", "lambda", "safety_factor", "num_samples", "constraint_names"},
                       "constants file");
        TubeConstants c;
        c.rho_c = j.at("rho_c").get<double>();
        c.L_D = j.at("L_D").get<double>();
        c.L_G = vec_from_json(j.at("L_G"));
        c.c = vec_from_json(j.at("c"));
        c.safety_factor = j.value("safety_factor", 1.0);
        c.num_samples = j.value("num_samples", std::size_t{0});
        return c;
    } catch (const json::exception& e) {
        throw InputError(std::string("constants file: ") + e.what());
    }
}

std::string hash_files(const std::vector<std::string>& paths)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& p : paths) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw InputError("cannot open " + p);
        const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        for (unsigned char ch : bytes) {
            h ^= ch;
            h *= 1099511628211ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json to_json(const RunManifest& m)
{
    return {{"config", m.config_path}, {"command", m.command}, {"seed", m.seed},
            {"out_dir", m.out_dir},    {"version", m.version}, {"input_hash", m.input_hash}};
}

void write_manifest(const std::string& dir, const RunManifest& m)
{
    fs::create_directories(dir);
    write_json_file((fs::path(dir) / "manifest.json").string(), to_json(m));
}

const char* toolkit_version() { return "0.1.0"; }

} // namespace rampc
