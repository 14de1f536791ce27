#include "rampc/sampling.hpp"

#include <array>

namespace rampc {

namespace {

constexpr std::array<int, 24> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                         41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

} // namespace

double radical_inverse(std::uint64_t index, int base)
{
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
        f *= inv;
    }
    return r;
}

std::vector<Sample> generate_samples(const UncertainSystem& sys, const SampleSpec& spec)
{
    const int dim = sys.n + sys.m;
    require(dim <= static_cast<int>(kPrimes.size()), "generate_samples: too many dimensions for Halton");
    const Vec& lo = sys.sample_lo;
    const Vec& hi = sys.sample_hi;
    std::vector<Sample> out;
    auto push = [&](const Vec& y) {
        Sample s{y.head(sys.n), y.tail(sys.m)};
        if (!spec.filter || in_constraint_set(sys, s.x, s.u, 1e-12)) out.push_back(std::move(s));
    };

    if (spec.kind == SampleSpec::Kind::Halton) {
        require(spec.count > 0, "generate_samples: count must be positive");
        for (int i = 0; i < spec.count; ++i) {
            Vec y(dim);
            const std::uint64_t idx = spec.skip + static_cast<std::uint64_t>(i) + 1;
            for (int k = 0; k < dim; ++k)
                y(k) = lo(k) + (hi(k) - lo(k)) * radical_inverse(idx, kPrimes[static_cast<std::size_t>(k)]);
            push(y);
        }
        return out;
    }

    require(spec.grid_points >= 2, "generate_samples: grid needs at least 2 points per axis");
    std::vector<int> axes;
    for (int k = 0; k < dim; ++k)
        if (hi(k) > lo(k)) axes.push_back(k);
    std::vector<int> counter(axes.size(), 0);
    while (true) {
        Vec y = lo;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const int k = axes[a];
            y(k) = lo(k) + (hi(k) - lo(k)) * counter[a] / (spec.grid_points - 1.0);
        }
        push(y);
        std::size_t a = 0;
        while (a < axes.size() && ++counter[a] == spec.grid_points) counter[a++] = 0;
        if (a == axes.size()) break;
    }
    return out;
}

} // namespace rampc
