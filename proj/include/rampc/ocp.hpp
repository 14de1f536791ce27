#pragma once

#include "rampc/ccm.hpp"
#include "rampc/ccm_constants.hpp"
#include "rampc/chebyshev.hpp"
#include "rampc/geodesic.hpp"
#include "rampc/polytope.hpp"
#include "rampc/reference.hpp"
#include "rampc/sqp.hpp"
#include "rampc/system.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rampc {

struct MPCConfig {
    int N = 25;
    double Ts = 0.15;
    Mat Q; // n x n, identity when empty
    Mat R; // m x m, identity when empty
    /// RK4 substeps per sampling interval for the nominal model and the cost.
    int substeps = 1;
    GeodesicOptions geodesic;
    SQPOptions solver;
    /// Tolerance for candidate and terminal checks.
    double check_tol = 1e-5;
    /// Position coordinates of the state, used by path-shaped initial guesses.
    std::vector<int> position_idx;
    /// Rigid tube: constant scaling rigid_delta (computed from samples when
    /// negative), theta_bar fixed to rigid_theta_bar (centre of Theta_0 when empty).
    bool rigid = false;
    double rigid_delta = -1.0;
    Vec rigid_theta_bar;
    /// eta: the initial row is sqrt(E + eta^2) <= delta_0 and every tube bound
    /// carries + lambda eta. 0 gives E <= delta_0^2, which is degenerate at z_0 = x_t.
    double delta_floor = 1e-3;

    /// Fills Q, R defaults; throws ContractViolation on bad values.
    void prepare(int n, int m);
};

struct TerminalSpec {
    ReferenceFn reference;
};

/// Decision-vector layout: z_0..z_N, v_0..v_{N-1}, delta_0..delta_N, theta_bar,
/// delta_f_bar, w_bar_0..w_bar_{N-1}, interior geodesic nodes (column major).
struct OCPLayout {
    int n = 0, m = 0, p = 0, N = 0, D = 0;

    int z(int k) const { return k * n; }
    int v(int k) const { return (N + 1) * n + k * m; }
    int delta(int k) const { return (N + 1) * n + N * m + k; }
    int theta() const { return delta(N + 1); }
    int delta_f() const { return theta() + p; }
    int w_bar(int k) const { return delta_f() + 1 + k; }
    int geo() const { return w_bar(N); }
    int size() const { return geo() + n * (D - 1); }
};

struct MPCSolution {
    Mat z;      // (N+1) x n shooting nodes
    Mat z_fine; // (N*substeps+1) x n on the integration grid
    Mat v;      // N x m
    Vec delta;  // N+1
    Vec theta_bar;
    double delta_f_bar = 0.0;
    Vec w_bar; // N
    Mat geo;   // n x (D-1)
    double cost = 0.0;
    Vec stage_cost; // N interval integrals
    SolveStatus status = SolveStatus::MaxIterations;
    double violation = 0.0;
    int iterations = 0;
    Mat H;
    bool from_candidate = false;

    bool feasible(double tol) const { return violation <= tol; }
};

/// Residual summary of a decision vector.
struct OCPCheck {
    double max_eq = 0.0;
    double max_in = 0.0;
    double max_bound = 0.0;
    std::string worst; // label of the worst row
    bool pass(double tol) const { return max_eq <= tol && max_in <= tol && max_bound <= tol; }
};

class OCP {
public:
    OCP(UncertainSystem sys, CCM ccm, TubeConstants consts, Vec x_t, Polytope Theta_t, MPCConfig cfg,
        TerminalSpec terminal);
    OCP(const OCP&) = delete;
    OCP& operator=(const OCP&) = delete;

    const OCPLayout& layout() const { return lay_; }
    const NLPProblem& nlp() const { return nlp_; }
    NLPProblem& nlp() { return nlp_; }
    const UncertainSystem& sys() const { return sys_; }
    const CCM& ccm() const { return ccm_; }
    const TubeConstants& consts() const { return consts_; }
    const MPCConfig& config() const { return cfg_; }
    const TerminalSpec& terminal() const { return term_; }
    const Polytope& Theta() const { return Theta_; }
    const Vec& x_t() const { return x_t_; }
    const ChebyshevBasis& basis() const { return basis_; }
    double rigid_delta() const { return rigid_delta_; }
    /// False when Theta_t is a point and D = {0}.
    bool uncertain() const { return uncertain_; }
    /// delta_{k+1} = a delta_k + b w_bar_k
    double delta_a() const { return a_; }
    double delta_b() const { return b_; }

    Vec encode(const MPCSolution& s) const;
    MPCSolution decode(const Vec& x) const;

    /// Row labels for diagnostics and JSON export.
    std::vector<std::string> eq_labels() const;
    std::vector<std::string> in_labels() const;

    OCPCheck check(const Vec& x) const;

    /// Per-interval cost integrals at x.
    Vec stage_costs(const Vec& x) const;

    /// Nominal rollout under the metric feedback toward the reference (or toward
    /// a moving target along waypoints in position coordinates pos_idx).
    Vec initial_guess(const std::vector<Vec>& waypoints = {}, const std::vector<int>& pos_idx = {}) const;

    // NLP callbacks
    double objective(const Vec& x, Vec* grad) const;
    void eq(const Vec& x, Vec& c, Mat* J) const;
    void ineq(const Vec& x, Vec& c, Mat* J) const;

private:
    struct Eval {
        Vec x;
        bool derivs = false;
        double f = 0.0;
        Vec grad, ceq, cin;
        Mat Jeq, Jin;
        Mat Hgn;
        Vec stage;
    };
    const Eval& evaluate(const Vec& x, bool derivs) const;

    UncertainSystem sys_;
    CCM ccm_;
    TubeConstants consts_;
    Vec x_t_;
    Polytope Theta_;
    MPCConfig cfg_;
    TerminalSpec term_;
    ChebyshevBasis basis_;
    OCPLayout lay_;
    NLPProblem nlp_;

    std::vector<Vec> thetas_; // vertices of Theta_t
    std::vector<Vec> ds_;     // vertices of D
    std::vector<Vec> signs_;  // {-1, 1}^p
    bool uncertain_ = true;
    bool theta_box_ = false;
    Polytope Theta0_rows_;
    double a_ = 1.0, b_ = 0.0;
    double rigid_delta_ = 0.0;
    int n_vertex_rows_ = 0;

    mutable std::optional<Eval> cache_;
};

/// Constant scaling for rigid mode: sampled rigid_tube_scaling plus the margin
/// the delta floor eta needs.
double rigid_tube_delta(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts, const Polytope& Theta,
                        const Vec& theta_bar, double eta);

std::shared_ptr<OCP> build_ocp(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts,
                               const Vec& x_t, const Polytope& Theta_t, const MPCConfig& cfg,
                               const TerminalSpec& terminal);

/// SQP from the warm start (or the default initial guess).
MPCSolution solve_ocp(const OCP& ocp, const std::optional<MPCSolution>& warm = std::nullopt);

/// Best converged solve over several initial guesses (waypoint paths); the
/// plain initial guess is always tried first.
MPCSolution solve_ocp_multistart(const OCP& ocp, const std::vector<std::vector<Vec>>& paths,
                                 const std::vector<int>& pos_idx);

/// Shifted previous solution for the problem `next` (state x(t_{k+1}), Theta_{t_{k+1}}).
/// Throws GeodesicError when the initial geodesic fails.
MPCSolution shift_candidate(const OCP& next, const MPCSolution& prev);

struct TerminalCheck {
    bool pass = false;
    double state_residual = 0.0;
    double delta_excess = 0.0;     // delta - delta_f_bar
    double f_delta_value = 0.0;    // f_delta(delta_f_bar, z_ref, v_ref)
    Vec tightened;                 // h(z_ref, v_ref) + c delta_f_bar
};

TerminalCheck terminal_check(const UncertainSystem& sys, const CCM& ccm, const TubeConstants& consts,
                             const TerminalSpec& terminal, const Vec& z, double delta, const Vec& theta_bar,
                             const Polytope& Theta, double delta_f_bar, double tol = 1e-6);

} // namespace rampc
