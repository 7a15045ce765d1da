#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "fracpar/grid.hpp"
#include "fracpar/types.hpp"

namespace fracpar {

/// Multi-index beta = (beta_1, ..., beta_n).
struct multi_index {
    std::vector<int> c;

    multi_index() = default;
    explicit multi_index(std::vector<int> comps);

    int order() const noexcept;
    int dim() const noexcept { return static_cast<int>(c.size()); }
    /// xi^beta.
    double monomial(const std::vector<double>& xi) const;
    auto operator<=>(const multi_index&) const = default;
};

/// All multi-indices of dimension n and order exactly k (lexicographic).
std::vector<multi_index> multi_indices_of_order(int n, int k);

/// Homogeneous constant-coefficient operator A0(D) = sum_{|mu|=2b} a_mu D^mu, D = -i d/dx.
class constant_operator {
public:
    constant_operator(int n, int N, int b, std::map<multi_index, cmatrix> coeffs);

    int n() const noexcept { return n_; }
    int N() const noexcept { return N_; }
    int b() const noexcept { return b_; }
    const std::map<multi_index, cmatrix>& coeffs() const noexcept { return coeffs_; }

    /// A0(xi) = sum a_mu xi^mu.
    cmatrix symbol(const std::vector<double>& xi) const;
    /// Same operator with every coefficient multiplied by s.
    constant_operator scaled(double s) const;
    /// U^* a_mu U for every coefficient.
    constant_operator conjugated(const cmatrix& U) const;

private:
    int n_, N_, b_;
    std::map<multi_index, cmatrix> coeffs_;
};

inline cmatrix symbol_eval(const constant_operator& op, const std::vector<double>& xi) {
    return op.symbol(xi);
}

/// Deterministic sample of the unit sphere in R^n (count >= 2n).
std::vector<std::vector<double>> sphere_samples(int n, int count);

/// min over sampled unit eta of dissipativity_constant(A0(eta)).
double parabolicity_delta(const constant_operator& op, int sphere_sample_count = 256);

/// Throws parabolicity_error unless parabolicity_delta > 0; returns delta.
double require_parabolic(const constant_operator& op, int sphere_sample_count = 256);

using coefficient_fn = std::function<cmatrix(const std::vector<double>&)>;

/// A(x,D) = sum_{|beta|=2b} a_beta(x) D^beta + sum_{|beta|<2b} a_beta(x) D^beta.
struct variable_system {
    int n = 1, N = 1, b = 1;
    std::map<multi_index, coefficient_fn> principal;
    std::map<multi_index, coefficient_fn> lower;
    double holder_exponent = 1.0;
    double holder_constant = 0.0;
    double bound = 0.0;
    /// Set when every principal coefficient is constant and there are no lower terms.
    bool constant_principal = false;

    static variable_system from_constant(const constant_operator& op);
    /// Throws config_error on inconsistent dimensions or orders.
    void validate() const;
};

/// Principal part with coefficients read at y.
constant_operator freeze(const variable_system& sys, const std::vector<double>& y);

/// Result of spot-verifying the declared metadata on a grid.
struct system_check {
    double delta_min = 0.0;        // smallest frozen parabolicity constant
    double max_coefficient = 0.0;  // sup of coefficient 2-norms
    double max_holder_quotient = 0.0;
    bool bound_ok = false;
    bool holder_ok = false;
};

/// Samples the coefficients at the grid points and at deterministic point pairs.
system_check verify_system(const variable_system& sys, const grid_spec& grid,
                           int sphere_sample_count = 64);

enum class operator_part { full, principal, lower, frozen };

struct part_selector {
    operator_part kind = operator_part::full;
    std::vector<double> y;  // freezing point for kind == frozen

    static part_selector full() { return {operator_part::full, {}}; }
    static part_selector principal() { return {operator_part::principal, {}}; }
    static part_selector lower() { return {operator_part::lower, {}}; }
    static part_selector frozen_at(std::vector<double> y) { return {operator_part::frozen, std::move(y)}; }
};

/// Sampled C^N-valued field: column k holds u at grid point k.
using sampled_field = cmatrix;

/// Centered finite-difference stencil for d^k/dx^k on spacing h (2nd order).
/// Returns weights for offsets -w..w with w = stencil_half_width(k).
std::vector<double> derivative_stencil(int k, double h);
int stencil_half_width(int k);

/// Finite-difference realization of a part of A on a grid.
class fd_operator {
public:
    fd_operator(const variable_system& sys, part_selector part, grid_spec grid, boundary_mode mode);

    /// (A u)(x_k) as an N-vector.
    cvector apply(const sampled_field& u, std::size_t point) const;
    /// A u at every grid point.
    sampled_field apply(const sampled_field& u) const;
    /// Dense (N*P) x (N*P) matrix of the operator; unknown ordering is point-major
    /// (index = point*N + component).
    cmatrix assemble() const;

    const grid_spec& grid() const noexcept { return grid_; }

private:
    struct term {
        multi_index beta;
        std::vector<std::vector<double>> axis_weights;  // per axis, offsets -w..w
        std::vector<cmatrix> coeff;                     // per grid point, or size 1 when constant
    };
    template <class F>
    void for_each_neighbor(const term& tm, std::size_t point, F&& f) const;

    int N_;
    grid_spec grid_;
    boundary_mode mode_;
    std::vector<term> terms_;
};

/// One-shot convenience wrapper around fd_operator.
cvector apply(const variable_system& sys, part_selector part, const sampled_field& u,
              const grid_spec& grid, boundary_mode mode, std::size_t point);

}  // namespace fracpar
