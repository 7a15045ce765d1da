#include "fracpar/grid.hpp"

#include <cmath>

#include "fracpar/error.hpp"

namespace fracpar {

grid_spec::grid_spec(int dim, double L, int M) : n(dim), half_width(L), points_per_axis(M) { validate(); }

std::size_t grid_spec::size() const {
    std::size_t s = 1;
    for (int d = 0; d < n; ++d) s *= static_cast<std::size_t>(points_per_axis);
    return s;
}

void grid_spec::validate() const {
    if (n < 1) throw config_error("grid: dimension must be positive");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw config_error("grid: half_width must be positive");
    if (points_per_axis < 2 || points_per_axis % 2 != 0)
        throw config_error("grid: points_per_axis must be a positive even integer");
}

std::vector<int> grid_spec::unravel(std::size_t linear) const {
    std::vector<int> idx(n);
    for (int d = n - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(linear % points_per_axis);
        linear /= points_per_axis;
    }
    return idx;
}

std::size_t grid_spec::ravel(const std::vector<int>& idx) const {
    std::size_t k = 0;
    for (int d = 0; d < n; ++d) k = k * points_per_axis + static_cast<std::size_t>(idx[d]);
    return k;
}

std::vector<double> grid_spec::point(std::size_t linear) const {
    auto idx = unravel(linear);
    std::vector<double> x(n);
    for (int d = 0; d < n; ++d) x[d] = coordinate(idx[d]);
    return x;
}

}  // namespace fracpar
