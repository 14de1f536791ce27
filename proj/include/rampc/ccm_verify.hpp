#pragma once

#include "rampc/ccm.hpp"
#include "rampc/sampling.hpp"
#include "rampc/system.hpp"

#include <limits>

namespace rampc {

struct VerificationReport {
    bool pass = false;
    /// Worst max-eigenvalue of Mdot + <M A_cl> + 2 rho M, and the same divided by ||M||.
    double worst_eig = -std::numeric_limits<double>::infinity();
    double worst_normalized = -std::numeric_limits<double>::infinity();
    double tol_rel = 1e-6;
    Vec worst_x, worst_u, worst_theta, worst_d;
    std::size_t num_samples = 0;
    std::size_t num_checks = 0;
    /// Eigenvalue range of M(x) over the samples.
    double M_eig_min = std::numeric_limits<double>::infinity();
    double M_eig_max = 0.0;
    std::size_t non_spd = 0;
};

/// Largest eigenvalue of the contraction residual at one point.
double contraction_residual(const UncertainSystem& sys, const CCM& ccm, const Vec& x, const Vec& u,
                            const Vec& theta, const Vec& d);

VerificationReport verify_ccm(const UncertainSystem& sys, const CCM& ccm, const std::vector<Sample>& samples,
                              double tol_rel = 1e-6);
VerificationReport verify_ccm(const UncertainSystem& sys, const CCM& ccm, const SampleSpec& spec,
                              double tol_rel = 1e-6);

/// Fill M_lower, M_upper with the tightest scalar multiples of I found on the samples.
void set_metric_bounds(CCM& ccm, const std::vector<Sample>& samples);

} // namespace rampc
