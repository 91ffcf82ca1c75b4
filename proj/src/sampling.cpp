#include "molelab/sampling.hpp"

#include "molelab/rng.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace molelab {

std::vector<ParameterVector> lhs(const ParameterSpace& space, std::size_t n,
                                 std::uint64_t seed, const LhsOptions& options) {
    if (n < 1) throw std::invalid_argument("lhs: n must be >= 1");
    const std::size_t d = space.dimension();
    auto rng = make_engine(seed);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);

    // unit[i][k] for point i, dimension k
    std::vector<std::vector<double>> unit(n, std::vector<double>(d, 0.0));
    std::vector<std::size_t> strata(n);
    for (std::size_t k = 0; k < d; ++k) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        std::shuffle(strata.begin(), strata.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
            const double offset = options.centered ? 0.5 : jitter(rng);
            unit[i][k] = (static_cast<double>(strata[i]) + offset) /
                         static_cast<double>(n);
        }
    }

    std::vector<ParameterVector> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) points.push_back(space.from_unit(unit[i]));
    return points;
}

std::vector<ParameterVector> grid(const ParameterSpace& space,
                                  const std::vector<std::size_t>& levels_per_dim) {
    const std::size_t d = space.dimension();
    if (levels_per_dim.size() != d)
        throw std::invalid_argument("grid: one level count per dimension required");
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) {
        if (levels_per_dim[k] < 1)
            throw std::invalid_argument("grid: level count must be >= 1");
        if (total > (std::size_t{1} << 26) / levels_per_dim[k])
            throw std::invalid_argument("grid: design too large");
        total *= levels_per_dim[k];
    }

    std::vector<ParameterVector> points;
    points.reserve(total);
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> u(d, 0.0);
    for (std::size_t p = 0; p < total; ++p) {
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t levels = levels_per_dim[k];
            u[k] = levels == 1 ? 0.5
                               : static_cast<double>(idx[k]) /
                                     static_cast<double>(levels - 1);
        }
        points.push_back(space.from_unit(u));
        // lexicographic increment, last dimension fastest
        for (std::size_t k = d; k-- > 0;) {
            if (++idx[k] < levels_per_dim[k]) break;
            idx[k] = 0;
        }
    }
    return points;
}

} // namespace molelab
