#pragma once

#include <cstddef>
#include <vector>

#include "fracpar/types.hpp"

namespace fracpar::detail {

/// out[p_0..p_{n-1}] = sum_k coeff[k_0..k_{n-1}] exp(i sum_d y_d[p_d] (xi0 + k_d dxi)),
/// tensor layouts with the last axis fastest; nk coefficients per axis.
void tensor_synthesis(const std::vector<cplx>& coeff, int n, std::size_t nk, double xi0, double dxi,
                      const std::vector<std::vector<double>>& axis_points, std::vector<cplx>& out);

/// Lattice multi-index (-K..K per axis) of a linear coefficient index.
void lattice_index(std::size_t linear, int n, int K, std::vector<int>& k);

}  // namespace fracpar::detail
