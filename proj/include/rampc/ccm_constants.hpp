#pragma once

#include "rampc/ccm.hpp"
#include "rampc/sampling.hpp"
#include "rampc/system.hpp"

namespace rampc {

struct TubeConstants {
    double rho_c = 0.0;
    double L_D = 0.0;
    Vec L_G; // length p
    Vec c;   // length r
    double safety_factor = 1.0;
    std::size_t num_samples = 0;

    /// rho_c - L_D
    double lambda() const { return rho_c - L_D; }
    bool contractive() const { return lambda() > 0.0; }
};

struct ConstantsOptions {
    double safety_factor = 1.05;
    /// Fraction of best samples used as gradient-ascent starts; 0 disables refinement.
    double refine_fraction = 0.01;
    int refine_iters = 20;
};

/// Per-point quantities; exposed for tests and refinement.
double cj_at(const UncertainSystem& sys, const CCM& ccm, int j, const Vec& x, const Vec& u);
double LG_at(const UncertainSystem& sys, const CCM& ccm, int k, const Vec& x, const Vec& u);
double LD_at(const UncertainSystem& sys, const CCM& ccm, const Vec& x, const Vec& d);

Vec compute_cj(const UncertainSystem& sys, const CCM& ccm, const std::vector<Sample>& samples,
               const ConstantsOptions& opts = {});
Vec compute_LG(const UncertainSystem& sys, const CCM& ccm, const std::vector<Sample>& samples,
               const ConstantsOptions& opts = {});
double compute_LD(const UncertainSystem& sys, const CCM& ccm, const std::vector<Sample>& samples,
                  const ConstantsOptions& opts = {});

TubeConstants compute_tube_constants(const UncertainSystem& sys, const CCM& ccm, const std::vector<Sample>& samples,
                                     const ConstantsOptions& opts = {});

} // namespace rampc
