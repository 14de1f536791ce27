#pragma once

#include "rampc/estimation.hpp"
#include "rampc/io.hpp"
#include "rampc/ocp.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace rampc {

struct SimConfig {
    double duration = 9.0; // s
    std::uint64_t seed = 0;
    int n_m = 1;           // measurements per period
    int substeps = -1;     // truth RK4 substeps per T_s; the MPC substep count when negative
    bool adaptation = true;
    bool rigid = false;
    Vec theta_true;
    Vec x0;
    /// Draw the disturbance and noise; zero signals when false.
    bool disturbance = true;
    /// Waypoint paths tried as extra initial guesses (every step when
    /// multistart_every_step, otherwise only at t = 0).
    std::vector<std::vector<Vec>> paths;
    bool multistart_every_step = false;
    /// Relative cost tolerance when comparing the re-solve with the candidate.
    double cost_tol = 1e-9;

    void validate(const UncertainSystem& sys, const MPCConfig& mpc) const;
    int steps(double Ts) const;
};

enum class SimStatus { Completed, InitialInfeasible, Infeasible, EstimationFailed };

std::string to_string(SimStatus s);

struct CandidateInfo {
    bool available = false;
    bool feasible = false;
    double violation = 0.0; // worst row of OCP::check
    std::string worst;
    double cost = 0.0;
    /// max over nodes of delta_cand(k) - delta_prev(k + 1)
    double nesting = 0.0;
    /// cost_cand - (V_prev - stage_prev)
    double cost_excess = 0.0;
};

struct SimStep {
    int k = 0;
    double t = 0.0;
    Vec x;
    Vec u; // applied input at t_k
    Polytope Theta;
    double theta_size = 0.0;
    bool theta_true_in = true;
    bool theta_nested = true;

    SolveStatus status = SolveStatus::MaxIterations;
    bool from_candidate = false;
    int iterations = 0;
    double solve_time = 0.0; // s, including the candidate
    double sqp_cost = 0.0;   // cost of the re-solve (NaN when it failed to produce a point)
    double cost = 0.0;       // applied solution
    double stage_cost = 0.0; // first interval of the applied solution
    Vec theta_bar;
    double delta_f_bar = 0.0;
    Mat z;     // applied prediction nodes
    Vec delta; // applied tube scalings
    Vec v0;
    Vec solution; // applied decision vector in this step's OCP layout
    CandidateInfo candidate;
    /// V(t_k) - (V(t_{k-1}) - stage(t_{k-1})), 0 at k = 0
    double cost_decrease = 0.0;
    /// ||(z_0, v_0) - (z_ref, v_ref)||
    double tracking_error = 0.0;

    double v_delta = 0.0;     // V_delta(x(t_k), z_0)
    double v_delta_end = 0.0; // V_delta(x(t_{k+1}), z_{1|k}); compared with delta_{1|k}
    double containment_margin = 0.0; // v_delta_end - delta_{1|k}
    double constraint_margin = 0.0;  // max_j h_j(x(t_k), u(t_k))
    int geodesic_failures = 0;
};

struct FinePoint {
    double t = 0.0;
    Vec x, z, u;
};

struct SimLog {
    SimStatus status = SimStatus::Completed;
    std::string message;
    std::vector<SimStep> steps;
    std::vector<FinePoint> fine;
    Vec theta_true;
    std::uint64_t seed = 0;
    bool adaptation = true;
    bool rigid = false;
    double rigid_delta = 0.0;

    double total_cost() const;
};

/// f_w(x, u, theta_true, d) + eps.
Vec measure_derivative(const UncertainSystem& sys, const Vec& x, const Vec& u, const Vec& theta_true, const Vec& d,
                       const Vec& eps);

/// Uniform sample from a bounded polytope (rejection in its bounding box).
Vec sample_uniform(const Polytope& P, std::mt19937_64& rng);

SimLog run_closed_loop(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts,
                       const MPCConfig& mpc, const TerminalSpec& terminal, const SimConfig& sim);

struct AuditReport {
    bool pass = true;
    int steps = 0;
    double worst_containment = -1e300; // max V_delta - delta
    double worst_constraint = -1e300;  // max h_j
    double worst_initial = -1e300;     // max V_delta(x_k, z_0) - delta_0
    int theta_failures = 0;            // truth outside or nesting broken
    std::vector<std::string> failures;
};

AuditReport audit_containment(const SimLog& log, double tol = 1e-4);

void write_sim_csv(const std::string& path, const SimLog& log, const std::vector<std::string>& state_names = {});
void write_fine_csv(const std::string& path, const SimLog& log, const std::vector<std::string>& state_names = {});
/// Per-step predictions and tube data for plots, ellipse axes from M_lower.
json sim_to_json(const SimLog& log, const CCM& ccm);

} // namespace rampc
