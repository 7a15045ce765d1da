#pragma once

#include <functional>
#include <memory>
#include <shared_mutex>
#include <optional>
#include <vector>

#include "fracpar/grid.hpp"
#include "fracpar/operators.hpp"
#include "fracpar/specfun.hpp"

namespace fracpar {

/// Y_alpha_int1 and Y_alpha_int2 are the time integrals of Y_alpha over (0, t) with weights 1 and (t - tau);
/// they exist on the Fourier route only and carry no decay estimate.
enum class field_kind { Z, Z_alpha, Y_alpha, dtZ_alpha, Y_alpha_int1, Y_alpha_int2 };
enum class kernel_route { subordination, fourier };

const char* to_string(field_kind k);
const char* to_string(kernel_route r);

/// Matrix samples of a kernel on (times x grid points).
struct kernel_field {
    grid_spec grid;
    std::vector<double> times;
    field_kind kind = field_kind::Z;
    multi_index derivative;
    int N = 1;
    /// values[ti * grid.size() + p]
    std::vector<cmatrix> values;
    /// Same layout; nonzero where the kernel is singular (x = 0) and the value is a placeholder.
    std::vector<unsigned char> singular;

    std::size_t index(std::size_t ti, std::size_t p) const { return ti * grid.size() + p; }
    const cmatrix& at(std::size_t ti, std::size_t p) const { return values[index(ti, p)]; }
};

/// ML parameter beta of the Fourier symbol for a kind: Z_alpha -> 1, Y_alpha -> alpha, dtZ_alpha -> 0,
/// Y_alpha_int1 -> alpha + 1, Y_alpha_int2 -> alpha + 2.
double kind_ml_beta(field_kind kind, double alpha);
/// Exponent of t for the family with symbol t^{ml_beta-1} E_{alpha,ml_beta}(t^alpha A0).
/// ml_beta = alpha+1 and alpha+2 give the first and second time integrals of Y_alpha.
double ml_time_exponent(double ml_beta, double alpha, int n, int b, int order);
/// Exponent e in K(t,x) = t^e F(t^{-alpha/2b} x) for the fractional kinds.
double kind_time_exponent(field_kind kind, double alpha, int n, int b, int order);

/// D^beta Z(1, .) evaluated by Fourier synthesis on a frequency lattice whose period is
/// wide enough that periodic images are negligible inside the cutoff radius r0.
class classical_profile {
public:
    classical_profile(const constant_operator& op, multi_index beta);
    explicit classical_profile(const constant_operator& op);

    int n() const noexcept { return n_; }
    int N() const noexcept { return N_; }
    int b() const noexcept { return b_; }
    const multi_index& beta() const noexcept { return beta_; }
    /// Beyond |y| = r0 the profile is below 1e-17 of its maximum.
    double cutoff_radius() const noexcept { return r0_; }
    /// Largest entry magnitude seen while locating r0.
    double peak() const noexcept { return peak_; }
    double period() const noexcept { return period_; }
    double frequency_cutoff() const noexcept { return xi_max_; }

    cmatrix operator()(const std::vector<double>& y) const;
    /// Batch evaluation for n = 1: out[e][p] with e = i*N + j.
    void evaluate_1d(const double* y, std::size_t np, std::vector<std::vector<cplx>>& out) const;

private:
    void build(double period);
    int n_, N_, b_;
    multi_index beta_;
    constant_operator op_;
    double delta_;
    double r0_ = 0.0, peak_ = 0.0, period_ = 0.0, xi_max_ = 0.0, dxi_ = 0.0;
    int K_ = 0;                              // lattice index range -K..K per axis
    std::vector<std::vector<cplx>> coeff_;  // per entry, tensor layout (last axis fastest)
};

/// Weight w(sigma) of a subordination-type integral, with its Taylor coefficients at 0.
struct sigma_weight {
    std::function<double(double)> w;
    std::vector<double> taylor;  // w(s) = sum taylor[k] s^k for small s
};

/// F_{beta_ml - alpha}: phi_1 (beta_ml=1), psi_1 (beta_ml=alpha), nu_1 (beta_ml=0).
sigma_weight wright_weight(double alpha, double beta_ml);
/// e^{-s} sum_m c[m-1] s^{m-1}/(m-1)!  (transform of sum_m c_m (I - A0)^{-m}).
sigma_weight laguerre_weight(const std::vector<double>& c);

/// Integral over sigma in (0, inf) of w(sigma) sigma^{-p} D^beta Z(1, sigma^{-1/2b} y), p = (n+|beta|)/2b.
/// Composite Gauss-Legendre in log sigma on a fixed panel lattice, with panel halving
/// until successive results agree.
class subordinator {
public:
    subordinator(std::shared_ptr<const classical_profile> profile, sigma_weight weight, double tol = 1e-11);

    /// Throws singular_point when y = 0 and p >= 1.
    cmatrix operator()(const std::vector<double>& y) const;
    double p() const noexcept { return p_; }

private:
    struct level_cache {
        double du = 0.0;
        int panels = 0;                  // panels cached so far, counted down from u_hi
        std::vector<double> sigma;       // node sigma values
        std::vector<double> wq;          // quadrature weight * w(sigma) * sigma^{1-p}
        std::vector<double> absw;        // |wq|
    };
    /// Makes sure level L holds at least `panels` panels.
    void ensure(int L, int panels) const;
    cmatrix integrate(const std::vector<double>& y, int L, int panels, double* scale, double* wsum) const;

    std::shared_ptr<const classical_profile> prof_;
    sigma_weight w_;
    double tol_, p_, u_hi_, w_ref_ = 0.0;
    mutable std::shared_mutex mu_;
    mutable std::vector<std::unique_ptr<level_cache>> levels_;
};

/// Options shared by the kernel drivers.
struct kernel_options {
    std::optional<specfun::hankel_contour> contour;  // default: hankel_contour::standard(alpha)
    double subordination_tol = 1e-11;
};

/// t-independent profile F with K(t,x) = t^e F(t^{-alpha/2b} x).
class kernel_profile {
public:
    virtual ~kernel_profile() = default;
    /// Values at scaled points; singular points get a zero matrix and flag = 1.
    virtual void evaluate(const std::vector<std::vector<double>>& y, std::vector<cmatrix>& out,
                          std::vector<unsigned char>& singular) const = 0;
};

std::unique_ptr<kernel_profile> make_subordination_profile(const constant_operator& op, double alpha,
                                                           field_kind kind, const multi_index& beta,
                                                           const kernel_options& opt = {});
std::unique_ptr<kernel_profile> make_subordination_profile(const constant_operator& op, double alpha,
                                                           double ml_beta, const multi_index& beta,
                                                           const kernel_options& opt = {});
/// y_max bounds |y| of every later evaluation point (sets the lattice period).
std::unique_ptr<kernel_profile> make_fourier_profile(const constant_operator& op, double alpha,
                                                     field_kind kind, const multi_index& beta,
                                                     double y_max, const kernel_options& opt = {});
std::unique_ptr<kernel_profile> make_fourier_profile(const constant_operator& op, double alpha, double ml_beta,
                                                     const multi_index& beta, double y_max,
                                                     const kernel_options& opt = {});

/// Z(s,.) on the grid by synthesis on the grid's dual lattice (Nyquist cutoff pi/h).
/// Throws cutoff_refusal when delta*s*(pi/h)^{2b} < 28.
kernel_field classical_fscp(const constant_operator& op, double s, const grid_spec& grid,
                            const multi_index& beta = {});

/// Fractional kernel of a kind at several times by a chosen route.
kernel_field fractional_kernel(const constant_operator& op, double alpha, field_kind kind,
                               const std::vector<double>& times, const grid_spec& grid, kernel_route route,
                               const multi_index& beta = {}, const kernel_options& opt = {});

kernel_field fractional_fscp_subordination(const constant_operator& op, double alpha, double t,
                                           const grid_spec& grid);
kernel_field fractional_fscp_fourier(const constant_operator& op, double alpha, double t, const grid_spec& grid,
                                     const specfun::hankel_contour& contour);
kernel_field y_kernel(const constant_operator& op, double alpha, double t, const grid_spec& grid,
                      kernel_route route);
kernel_field dt_z_kernel(const constant_operator& op, double alpha, double t, const grid_spec& grid);

/// G(x) = integral over t > 0 of e^{-t} Z(t,x) for the (frozen) operator; x != 0.
cmatrix elliptic_green(const constant_operator& op, const std::vector<double>& x, const multi_index& beta = {});

/// Integral over the grid at time index ti. Periodic trapezoid for the classical kernel;
/// for the fractional kernels a tensor Gregory rule on each side of x = 0. Singular points are skipped.
cmatrix spatial_integral(const kernel_field& f, std::size_t ti);

}  // namespace fracpar
