#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracpar/estimates.hpp"
#include "fracpar/kernels.hpp"
#include "fracpar/oracle.hpp"
#include "fracpar/operators.hpp"

namespace fracpar {

/// Space-time discretization of a Levi run: n = 1, uniform nodes t_k = k T / steps (k = 1..steps),
/// and one padded (non-periodic) grid for x, y and xi.
struct levi_discretization {
    double alpha = 0.5;
    grid_spec grid{1, 3.0 * pi, 96};
    double T = 1.0;
    int steps = 32;
    kernel_options kernel;

    double dt() const { return T / steps; }
    /// t_1..t_steps.
    std::vector<double> times() const;
    void validate() const;
};

/// Frozen-coefficient kernels K(t_k, x_i - y_j; y_j) for every grid point y_j, kept in compact tables.
/// Each table is the output of fractional_kernel for freeze(system, y_j) on the difference grid
/// (1, 2L, 2M), so entry d = i - j + M holds the kernel at x_i - y_j.
class parametrix_provider {
public:
    /// Builds, in parallel over y_j, every table the Levi construction needs for this system.
    parametrix_provider(const variable_system& sys, const levi_discretization& disc);

    const variable_system& system() const noexcept { return sys_; }
    const levi_discretization& discretization() const noexcept { return disc_; }
    int N() const noexcept { return sys_.N; }
    std::size_t points() const { return disc_.grid.size(); }
    /// Derivative orders appearing in A(x, D) (principal and lower), plus 0.
    const std::vector<int>& orders() const noexcept { return orders_; }
    /// Grid used for the frozen kernels.
    grid_spec difference_grid() const;

    bool has(field_kind kind, int order) const;
    /// Kernel frozen at y_j at time index k (0-based, t_{k+1}) and point x_i; zero where singular.
    cmatrix at(field_kind kind, int order, std::size_t k, std::size_t i, std::size_t j) const;
    bool singular(field_kind kind, int order, std::size_t k, std::size_t i, std::size_t j) const;
    /// The whole table for y_j as a kernel field on the difference grid.
    kernel_field field(field_kind kind, int order, std::size_t j) const;
    /// Largest table entry at |x - y| >= L relative to the largest entry overall: the size of what
    /// the truncation to the box drops.
    double truncation_bound() const noexcept { return truncation_; }

    /// Diagonal quadrature correction for an order-0 kind frozen at y_j at time index k:
    /// (exact mass - h * sum over the difference grid) / h. Added at x = y it makes the rectangle
    /// rule exact for the x-integral, which removes the h^2 error of the kernel's kink at x = y.
    cmatrix mass_correction(field_kind kind, std::size_t k, std::size_t j) const;

    /// Raw entry (row-major N x N) for hot loops.
    const cplx* raw(field_kind kind, int order, std::size_t j, std::size_t k, std::size_t d) const;

private:
    struct table {
        std::vector<std::vector<cplx>> data;           // per y_j
        std::vector<std::vector<unsigned char>> sing;  // per y_j
    };
    const table& get(field_kind kind, int order) const;

    variable_system sys_;
    levi_discretization disc_;
    std::vector<int> orders_;
    std::map<std::pair<int, int>, table> tables_;
    std::map<int, std::vector<cmatrix>> corrections_;  // per kind, index j * steps + k
    double truncation_ = 0.0;
};

enum class inhomogeneity_kind { M, K };
enum class density_kind { Q, Phi };
const char* to_string(density_kind k);

/// M = [A(x,D) - A0(xi,D)] Z0(t, x - xi; xi) or K with Y0, at (t_{k+1}, x_i; xi_j).
/// Throws singular_point when i == j.
cmatrix levi_inhomogeneity(const parametrix_provider& p, inhomogeneity_kind kind, std::size_t k, std::size_t i,
                           std::size_t j);

/// Samples over (t_k, x_i, xi_j): values[k] is an (M N) x (M N) matrix whose (i, j) block is the
/// N x N sample at (t_{k+1}, x_i; xi_j).
struct levi_field {
    grid_spec grid;
    std::vector<double> times;
    int N = 1;
    std::vector<cmatrix> values;

    cmatrix at(std::size_t k, std::size_t i, std::size_t j) const {
        return values[k].block(i * N, j * N, N, N);
    }
    double sup_norm() const;
};

struct volterra_density {
    density_kind kind = density_kind::Q;
    levi_field field;
    int iteration_count = 0;
    /// sup |density - right-hand side| relative to sup |inhomogeneity| (0 when both vanish).
    double residual = 0.0;
    double tol = 0.0;
    /// sup |inhomogeneity|, the reference for the relative norms.
    double scale = 0.0;
    /// Update norms of every sweep, relative like the residual.
    std::vector<double> updates;
};

struct volterra_options {
    double tol = 1e-8;
    int max_sweeps = 200;
};

/// Successive substitution for Q = M + K * Q or Phi = K + K * Phi. The time integrals use product
/// integration: the density is linear between nodes and proportional to t^{-alpha} on (0, t_1], and
/// its products with the kernel are integrated exactly through the time-integrated kinds.
/// Throws divergence_error when the update grows for 3 consecutive sweeps or max_sweeps is reached.
volterra_density solve_volterra(density_kind kind, const parametrix_provider& p, const volterra_options& opt = {});

/// Z1 = Z0 + V_Z and Y1 = Y0 + V_Y with V = Y0 * density.
struct green_samples {
    levi_field Z1, Y1, V_Z, V_Y;
};
green_samples green_assemble(const parametrix_provider& p, const volterra_density& Q, const volterra_density& Phi);

/// u(t_k, .) for k = 0..steps: h sum_j Z1(t, x - xi_j) u0(xi_j) plus the source term Y0 * (f + phi), where
/// phi = K * f + K * phi is the source density (equivalent to integrating Y1 against f).
/// u0 is sampled on the Levi grid; an empty f means f = 0.
trajectory cauchy_solve(const parametrix_provider& p, const green_samples& g, const sampled_field& u0,
                        const field_source_fn& f);

/// Post-hoc residual of a density on the time grid shifted by dt/2. `fine` must have twice the
/// density's steps; the density is extended to the midpoints in its own quadrature basis and the
/// equation is re-evaluated there with the fine product weights (relative like volterra_density::residual).
double shifted_grid_residual(const parametrix_provider& fine, const volterra_density& d);

/// Grid-independence check: sup over the coarse nodes of |fine - coarse| relative to the coarse scale.
/// `fine` must be solved with twice the steps of `coarse` on the same spatial grid.
double time_doubling_change(const volterra_density& coarse, const volterra_density& fine);

/// |V_Z| or |V_Y| samples over x != xi with x and xi in the inner half of the box.
std::vector<bound_sample> remainder_samples(const levi_field& v);

/// Remainder bound for beta = 0 and n + |beta| < 2b: V_Z with t^{-alpha gamma0 / 2b} |x - xi|^{-n + gamma - gamma0},
/// gamma0 scanned over (0, gamma) and the best report returned; V_Y with t^{-1 + alpha} |x - xi|^{-n + gamma}.
estimate_report certify_remainder(const levi_field& v, bool is_z, const variable_system& sys,
                                  const certify_options& opt);

/// KernelField CSV with an extra xi column: t,x1,xi1,i,j,re,im.
std::string levi_field_csv(const levi_field& f, const std::string& label, const std::string& digest);
nlohmann::json levi_field_header(const levi_field& f, const std::string& label, const std::string& digest);

}  // namespace fracpar
