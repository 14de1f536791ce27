#include <doctest.h>

#include "rampc/ccm_constants.hpp"
#include "rampc/ccm_verify.hpp"
#include "rampc/io.hpp"
#include "rampc/polytope_ops.hpp"
#include "rampc/quadrotor.hpp"
#include "rampc/tube.hpp"

#include <cmath>
#include <random>

using namespace rampc;

namespace {

struct Scalar {
    UncertainSystem sys;
    CCM ccm;
    Scalar()
        : sys(system_from_json(read_json_file(std::string(RAMPC_SOURCE_DIR) + "/data/scalar_system.json"))),
          ccm(ccm_from_json(read_json_file(std::string(RAMPC_SOURCE_DIR) + "/data/scalar_ccm.json")))
    {
    }
};

TubeConstants scalar_constants(double lambda)
{
    TubeConstants c;
    c.rho_c = lambda;
    c.L_G = Vec::Zero(1);
    c.c = Vec::Ones(4);
    return c;
}

} // namespace

TEST_CASE("tube: scalar mismatch bound is |theta - theta_bar + d|")
{
    Scalar s;
    const TubeConstants c = scalar_constants(1.0);
    const Vec z = Vec::Zero(1), v = Vec::Zero(1), tb = Vec::Constant(1, 0.1);
    CHECK(w_bar_requirement(c, s.ccm, s.sys, 0.2, z, v, Vec::Constant(1, 0.5), Vec::Constant(1, -0.1), tb) ==
          doctest::Approx(0.3));
    // worst vertex pair: theta = -0.5, d = -0.1
    CHECK(max_w_bar_requirement(c, s.ccm, s.sys, 0.2, z, v, with_vertices(s.sys.Theta0), tb) ==
          doctest::Approx(0.7));
    CHECK(f_delta(c, s.ccm, s.sys, 0.2, z, v, with_vertices(s.sys.Theta0), tb) == doctest::Approx(-0.2 + 0.7));
}

TEST_CASE("tube: tightening adds c_j delta")
{
    Scalar s;
    const TubeConstants c = scalar_constants(1.0);
    const Vec t = tightened_constraints(s.sys, c, Vec::Constant(1, 0.5), Vec::Constant(1, 1.0), 0.25);
    const Vec h = eval_constraints(s.sys, Vec::Constant(1, 0.5), Vec::Constant(1, 1.0));
    CHECK((t - h - Vec::Constant(4, 0.25)).norm() < 1e-14);
}

TEST_CASE("tube: rigid scaling is the steady state of the tube ODE")
{
    Scalar s;
    const TubeConstants c = scalar_constants(1.0);
    SampleSpec spec;
    spec.kind = SampleSpec::Kind::Grid;
    spec.grid_points = 5;
    const auto samples = generate_samples(s.sys, spec);
    const double r = rigid_tube_scaling(s.sys, s.ccm, c, with_vertices(s.sys.Theta0), Vec::Zero(1), samples);
    CHECK(r == doctest::Approx(0.6).epsilon(1e-6));
    const TubeTrajectory tr = integrate_tube(s.sys, s.ccm, c, Vec::Zero(1), r, Mat::Zero(10, 1), Vec::Zero(1),
                                             with_vertices(s.sys.Theta0), 0.2);
    for (const auto& st : tr.states) CHECK(st.delta == doctest::Approx(r).epsilon(1e-9));
}

TEST_CASE("constants: scalar certificate gives the closed-form constants")
{
    Scalar s;
    SampleSpec spec;
    spec.kind = SampleSpec::Kind::Grid;
    spec.grid_points = 7;
    const auto samples = generate_samples(s.sys, spec);
    ConstantsOptions o;
    o.safety_factor = 1.0;
    const TubeConstants c = compute_tube_constants(s.sys, s.ccm, samples, o);
    CHECK(c.rho_c == doctest::Approx(1.0));
    CHECK(c.L_D == doctest::Approx(0.0));
    CHECK(c.L_G(0) == doctest::Approx(0.0));
    // x rows have unit gradient and M = 1; u rows vanish as K = 0
    CHECK(c.c(0) == doctest::Approx(1.0));
    CHECK(c.c(2) == doctest::Approx(0.0));
    CHECK(verify_ccm(s.sys, s.ccm, samples).pass);
}

TEST_CASE("constants: per-point values on the quadrotor agree with central differences of h")
{
    const UncertainSystem sys = quadrotor_model();
    const CCM ccm = ccm_from_json(read_json_file(std::string(RAMPC_SOURCE_DIR) + "/data/quadrotor_ccm.json"));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-0.3, 0.3);
    for (int t = 0; t < 5; ++t) {
        Vec x(6), u(2);
        for (int i = 0; i < 6; ++i) x(i) = U(rng);
        u << 2.4 + U(rng), 2.4 + U(rng);
        const Mat W = eval_metric(ccm, x).inverse();
        const Mat K = eval_feedback_gain(ccm, x);
        for (int j = 0; j < sys.r(); ++j) {
            const auto [gx, gu] = sys.constraints[static_cast<std::size_t>(j)].gradient(x, u);
            const Vec a = gx + K.transpose() * gu;
            CHECK(cj_at(sys, ccm, j, x, u) == doctest::Approx(std::sqrt(a.dot(W * a))).epsilon(1e-10));
        }
    }
}

TEST_CASE("verify: a perturbed quadrotor certificate is rejected")
{
    const UncertainSystem sys = quadrotor_model();
    CCM ccm = ccm_from_json(read_json_file(std::string(RAMPC_SOURCE_DIR) + "/data/quadrotor_ccm.json"));
    SampleSpec spec;
    spec.count = 300;
    CHECK(verify_ccm(sys, ccm, spec).pass);
    ccm.rho_c *= 4.0;
    CHECK_FALSE(verify_ccm(sys, ccm, spec).pass);
}
