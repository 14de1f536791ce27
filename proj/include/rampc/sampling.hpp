#pragma once

#include "rampc/system.hpp"

#include <cstdint>
#include <vector>

namespace rampc {

struct SampleSpec {
    enum class Kind { Grid, Halton };
    Kind kind = Kind::Halton;
    /// Halton: number of points drawn (before filtering).
    int count = 10000;
    /// Grid: points per non-degenerate axis.
    int grid_points = 5;
    /// Halton: sequence offset, so different specs give disjoint point sets.
    std::uint64_t skip = 0;
    /// Drop points outside the constraint set.
    bool filter = true;
};

struct Sample {
    Vec x;
    Vec u;
};

double radical_inverse(std::uint64_t index, int base);

/// Points of the system's sampling box, filtered to the constraint set.
std::vector<Sample> generate_samples(const UncertainSystem& sys, const SampleSpec& spec);

} // namespace rampc
