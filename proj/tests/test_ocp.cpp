#include <doctest.h>

#include "rampc/config.hpp"
#include "rampc/polytope_ops.hpp"

#include <cmath>

using namespace rampc;

namespace {

const RunConfig& scalar()
{
    static const RunConfig rc = load_run_config(std::string(RAMPC_SOURCE_DIR) + "/configs/scalar_tracking.json");
    return rc;
}

} // namespace

TEST_CASE("ocp: layout and encode/decode round trip")
{
    const RunConfig& rc = scalar();
    const auto ocp =
        build_ocp(rc.sys, rc.ccm, rc.tube_constants(), rc.sim.x0, with_vertices(rc.sys.Theta0), rc.mpc, rc.terminal);
    CHECK(ocp->layout().size() == ocp->nlp().n);
    const Vec g = ocp->initial_guess();
    const Vec back = ocp->encode(ocp->decode(g));
    CHECK((back - g).norm() < 1e-14);
    CHECK(static_cast<int>(ocp->eq_labels().size()) == ocp->nlp().n_eq);
    CHECK(static_cast<int>(ocp->in_labels().size()) == ocp->nlp().n_in);
}

TEST_CASE("ocp: scalar solve converges and reaches the reference")
{
    const RunConfig& rc = scalar();
    const auto ocp =
        build_ocp(rc.sys, rc.ccm, rc.tube_constants(), rc.sim.x0, with_vertices(rc.sys.Theta0), rc.mpc, rc.terminal);
    const MPCSolution s = solve_ocp(*ocp);
    REQUIRE(s.status == SolveStatus::Converged);
    CHECK(ocp->check(ocp->encode(s)).pass(1e-6));
    const ReferencePoint ref = reference_point(rc.terminal.reference, s.theta_bar);
    CHECK(std::abs(s.z(rc.mpc.N, 0) - ref.z(0)) < 1e-5);
    // the tube never drops below the floor and stays at most w_f / lambda
    CHECK(s.delta.minCoeff() >= -1e-9);
}

TEST_CASE("ocp: shifted solution is feasible for the exact successor state")
{
    const RunConfig& rc = scalar();
    const TubeConstants c = rc.tube_constants();
    SimConfig sim = rc.sim;
    sim.duration = 0.45;
    const SimLog log = run_closed_loop(rc.sys, rc.ccm, c, rc.mpc, rc.terminal, sim);
    REQUIRE(log.status == SimStatus::Completed);
    REQUIRE(log.steps.size() == 3);
    for (std::size_t k = 1; k < log.steps.size(); ++k) {
        CHECK(log.steps[k].candidate.available);
        CHECK(log.steps[k].candidate.feasible);
        CHECK(log.steps[k].cost_decrease <= 1e-6);
    }
    CHECK(audit_containment(log).pass);
}

TEST_CASE("ocp: rigid mode fixes theta_bar and the scaling")
{
    const RunConfig& rc = scalar();
    MPCConfig m = rc.mpc;
    m.rigid = true;
    const auto ocp =
        build_ocp(rc.sys, rc.ccm, rc.tube_constants(), rc.sim.x0, with_vertices(rc.sys.Theta0), m, rc.terminal);
    CHECK(ocp->rigid_delta() > 0.6);
    const MPCSolution s = solve_ocp(*ocp);
    REQUIRE(s.status == SolveStatus::Converged);
    CHECK(s.theta_bar(0) == doctest::Approx(0.0));
}
