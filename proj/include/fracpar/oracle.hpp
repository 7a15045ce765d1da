#pragma once

#include <functional>
#include <vector>

#include "fracpar/grid.hpp"
#include "fracpar/operators.hpp"
#include "fracpar/types.hpp"

namespace fracpar {

/// L1 discretization of the Caputo derivative on a uniform time grid t_k = k dt.
struct stepping_scheme {
    double alpha = 0.5;
    double dt = 0.0;
    int step_count = 0;
    /// weights[j] = ((j+1)^{1-alpha} - j^{1-alpha}) / Gamma(2-alpha), j = 0..step_count-1.
    std::vector<double> weights;
    /// Exponents sigma of the starting corrections (non-integer j*alpha < 2 - alpha).
    std::vector<double> sigmas;
    /// corrections[k-1][m-1]: weight of (u_m - u_0) at step k, in units dt = 1.
    std::vector<std::vector<double>> corrections;

    /// corrected = false leaves sigmas and corrections empty (plain L1).
    static stepping_scheme make(double alpha, double dt, int step_count, bool corrected = true);
    bool corrected() const noexcept { return !sigmas.empty(); }
};

/// Plain L1 value of (D^alpha u)(t_k) from u(t_0..t_k); exact for u linear in t.
double caputo_l1(const std::vector<double>& history, const stepping_scheme& scheme);
/// L1 plus the starting corrections; exact for u = t^sigma, sigma in scheme.sigmas.
double caputo_corrected(const std::vector<double>& history, const stepping_scheme& scheme);

/// Right-hand side f(t) of a linear system, as a vector of the system size.
using source_fn = std::function<cvector(double t)>;

/// D^alpha u = A u + f(t), u(0) = u0, by implicit corrected L1 stepping.
/// Returns u at t_0..t_K. Throws conditioning_error when the step matrix is singular.
std::vector<cvector> solve_linear_fode(const cmatrix& A, const cvector& u0, const source_fn& f,
                                       const stepping_scheme& scheme);

/// Solution samples: values[k] holds u(t_k) with column p the N-vector at grid point p.
struct trajectory {
    grid_spec grid;
    int N = 1;
    double alpha = 0.5;
    double dt = 0.0;
    bool corrected = true;
    std::vector<double> times;
    std::vector<sampled_field> values;
};

/// f(t, x) as an N-vector.
using field_source_fn = std::function<cvector(double t, const std::vector<double>& x)>;

/// D^alpha u = A(x,D) u + f on a periodic grid with the finite-difference operator.
/// An empty f means f = 0.
trajectory solve_ivp(const variable_system& sys, const sampled_field& u0, const field_source_fn& f,
                     double T, int steps, const grid_spec& grid, double alpha, bool corrected = true);

/// Samples an N-vector function on a grid (column per point).
sampled_field sample_field(const grid_spec& grid, int N,
                           const std::function<cvector(const std::vector<double>&)>& u);

/// Observed order log2(e_coarse / e_fine) for successive halvings.
std::vector<double> observed_orders(const std::vector<double>& errors);

}  // namespace fracpar
