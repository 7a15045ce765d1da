#pragma once

#include <cstddef>
#include <vector>

namespace fracpar::quad {

struct rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] (Newton on the Legendre recurrence); cached per n.
const rule& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
rule gauss_legendre(int n, double a, double b);

/// Composite rule: `panels` equal panels of n-point Gauss-Legendre on [a, b].
rule composite_gauss_legendre(int n, int panels, double a, double b);

/// Trapezoid weights with Gregory end corrections of the given order (2..8)
/// for m+1 equally spaced samples with spacing h. Exact for polynomials
/// of degree < order when m >= 2*order.
std::vector<double> gregory_weights(std::size_t m, double h, int order = 8);

}  // namespace fracpar::quad
