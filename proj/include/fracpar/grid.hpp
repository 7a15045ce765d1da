#pragma once

#include <cstddef>
#include <vector>

namespace fracpar {

enum class boundary_mode { periodic, padded };

/// Uniform tensor grid on [-L, L)^n with M points per axis, x_i = -L + i*h.
struct grid_spec {
    int n = 1;
    double half_width = 1.0;
    int points_per_axis = 2;

    grid_spec() = default;
    grid_spec(int dim, double L, int M);

    double spacing() const { return 2.0 * half_width / points_per_axis; }
    std::size_t size() const;
    /// Throws config_error when the invariants fail.
    void validate() const;

    /// Axis index vector of a linear index (last axis fastest).
    std::vector<int> unravel(std::size_t linear) const;
    std::size_t ravel(const std::vector<int>& idx) const;
    std::vector<double> point(std::size_t linear) const;
    double coordinate(int i) const { return -half_width + i * spacing(); }
};

}  // namespace fracpar
