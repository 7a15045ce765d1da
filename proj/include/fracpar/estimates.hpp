#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracpar/kernels.hpp"
#include "fracpar/operators.hpp"

namespace fracpar {

/// R = t^{-alpha}|x|^{2b} and rho = R^{1/(2b-alpha)}.
struct scaling_quantities {
    double R = 0.0;
    double rho = 0.0;
};

scaling_quantities scaling(double alpha, int b, double t, double x_norm);

/// far: R >= 1, near: R <= 1, unified: every R.
enum class regime { far, near, unified };
const char* to_string(regime r);

/// C t^{t_power} |x|^{x_power} [|log R| + 1]^{log_factor} e^{-sigma rho}, the last factor only when exponential.
struct bound_form {
    double t_power = 0.0;
    double x_power = 0.0;
    bool log_factor = false;
    bool exponential = false;

    /// Everything except C and the exponential.
    double algebraic(double t, double x_norm, double R) const;
    /// True when the form blows up at x = 0.
    bool singular_at_origin() const { return x_power < 0.0 || log_factor; }
};

struct bound_case {
    field_kind kind = field_kind::Z_alpha;
    int n = 1, b = 1, order = 0;
    regime reg = regime::far;
    bound_form form;
    std::string label;
};

/// The single bound shape for (kind, n, b, |beta|, regime); throws precondition_error where
/// no estimate of that kind exists (time derivative with |beta| > 0, unified time derivative).
bound_case select_case(field_kind kind, int n, int b, int order, regime reg, double alpha);
/// Every regime with an estimate for (kind, n, b, |beta|).
std::vector<bound_case> applicable_cases(field_kind kind, int n, int b, int order, double alpha);

struct bound_sample {
    double t = 0.0;
    double x = 0.0;  // |x|
    double value = 0.0;
};

struct certify_options {
    double alpha = 0.5;
    /// Samples below noise_rel * (largest value) carry no information and are dropped.
    double noise_rel = 1e-11;
    /// Validation samples may exceed the fitted sup by this factor.
    double allowance = 1.05;
    /// Samples above this rho quantile validate instead of fitting (exponential shapes only).
    double fit_fraction = 0.6;
    /// Samples below this t quantile validate instead of fitting.
    double time_tail_fraction = 0.2;
    std::size_t min_samples = 100;
    double sigma_max = 4.0;
    double sigma_tol = 1e-3;
    /// A field whose largest value is at most this is reported as identically zero.
    double zero_floor = 0.0;
};

struct estimate_report {
    bound_case bcase;
    double fitted_C = 0.0;
    double fitted_sigma = 0.0;
    double sup_ratio = 0.0;
    std::size_t sample_count = 0;
    bool pass = false;
    std::string note;

    nlohmann::json to_json() const;
};

/// |value| of every non-singular entry of a field (2-norm of the matrix), with |x|.
std::vector<bound_sample> samples_from_field(const kernel_field& f);

/// Fit sigma by bisection on [0, sigma_max]: sigma is admissible when the bound fitted on the
/// fit split covers the validation split (smallest t, and large rho for exponential shapes)
/// within the allowance. C is the fitted sup times the allowance; pass means sup_ratio <= 1.
estimate_report certify_bound(const std::vector<bound_sample>& samples, const bound_case& c,
                              const certify_options& opt);
estimate_report certify_bound(const kernel_field& f, const bound_case& c, const certify_options& opt);

/// sup |value| / bound with the constants of an existing report (no refit).
double evaluate_ratio(const estimate_report& r, const std::vector<bound_sample>& samples, double alpha);

/// Log-uniform times in [t_min, t_max].
std::vector<double> log_uniform_times(double t_min, double t_max, int count);

struct difference_options {
    std::vector<double> times;
    grid_spec grid{1, 8.0, 128};
    kernel_route route = kernel_route::fourier;
};

using point_pairs = std::vector<std::pair<std::vector<double>, std::vector<double>>>;

/// |K(t,x;y') - K(t,x;y'')| / |y'-y''|^gamma for kernels frozen at each pair, pooled.
std::vector<bound_sample> difference_samples(const variable_system& sys, double alpha, const point_pairs& pairs,
                                             field_kind kind, int order, const difference_options& dopt);

/// Certifies the difference samples against the shape of case c.
estimate_report certify_difference_bound(const variable_system& sys, double alpha, const point_pairs& pairs,
                                         const bound_case& c, const difference_options& dopt,
                                         const certify_options& opt);

/// Integral over xi of dt Z_alpha^{(0)}(t, x - xi; xi) on an n = 1 grid, bounded by
/// C t^{-1 + alpha gamma / 2b}. Sampled at every time and at the x in x_points.
estimate_report certify_parametrix_time_derivative(const variable_system& sys, double alpha,
                                                   const std::vector<double>& times,
                                                   const grid_spec& xi_grid,
                                                   const std::vector<double>& x_points,
                                                   const certify_options& opt);

}  // namespace fracpar
