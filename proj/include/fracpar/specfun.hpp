#pragma once

#include <memory>
#include <vector>

#include "fracpar/types.hpp"

/// Wright-type subordination kernels and Mittag-Leffler functions of
/// scalars and of dissipative matrices.
namespace fracpar::specfun {

/// 1/Gamma(x), zero at the poles of Gamma.
double rgamma(double x);

/// F_mu(z) = sum_k (-z)^k / (k! Gamma(mu - alpha k)) by its power series.
/// Returns false through `ok` when the series needs more than 120 terms,
/// when a term exceeds 1e15, or when cancellation would cost more than
/// four digits; the value is then unreliable.
double wright_series(double alpha, double mu, double z, bool* ok = nullptr);

/// Mainardi-Wright function Phi_alpha(z), z >= 0.
double wright_phi(double alpha, double z);

/// d/dz Phi_alpha(z), z >= 0.
double wright_phi_derivative(double alpha, double z);

/// Phi_alpha by the integral form used for large z only (exposed for overlap tests).
double wright_phi_integral(double alpha, double z);

enum class kernel_kind { phi, psi, nu };

/// phi_{t,alpha}(s), psi_{t,alpha}(s) or nu_{t,alpha}(s) = d/dt phi_{t,alpha}(s).
double subordination_kernel(kernel_kind kind, double alpha, double t, double s);

/// Rays at angle +-angle from the point radius*e^{+-i angle}, joined by an arc.
struct hankel_contour {
    double radius = 1.0;
    double angle = 0.0;
    int nodes_per_ray = 64;
    int nodes_on_arc = 32;

    /// Radius 1, angle at the midpoint of (pi alpha/2, min(pi/2, pi alpha)).
    static hankel_contour standard(double alpha);
    /// Throws config_error when the invariants for this alpha fail.
    void validate(double alpha) const;
};

enum class ml_family { one, alpha, zero };

/// Second parameter beta of E_{alpha,beta} for a family.
double family_beta(double alpha, ml_family family);

/// Node table for -(1/(2 pi i alpha)) * integral of e^{eta^{1/alpha}} eta^{(1-beta)/alpha} (B - eta)^{-1} d eta.
struct contour_rule {
    std::vector<cplx> eta;
    std::vector<cplx> coef;  // already includes -(1/(2 pi i alpha)) and d eta
};

contour_rule make_contour_rule(double alpha, double beta, const hankel_contour& c, int level);

/// Cached evaluator of E_{alpha,beta} for one (alpha, beta, contour).
/// Node tables for several refinement levels are built on construction,
/// so a const evaluator is safe to share between threads.
class ml_evaluator {
public:
    ml_evaluator(double alpha, double beta, hankel_contour contour);
    ml_evaluator(double alpha, double beta);

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

    /// Scalar value: series near the origin, contour in the supported region.
    cplx scalar(cplx z) const;
    /// Matrix value through the contour with node doubling.
    cmatrix matrix(const cmatrix& B) const;

private:
    cplx contour_scalar(cplx z, int level) const;
    cmatrix contour_matrix(const cmatrix& B, int level, double* scale) const;

    double alpha_, beta_;
    hankel_contour contour_;
    std::vector<contour_rule> rules_;
};

/// Taylor series sum_k z^k / Gamma(alpha k + beta); ok=false when it fails to settle.
cplx ml_series(double alpha, double beta, cplx z, bool* ok = nullptr);
/// Matrix Taylor series (test oracle).
cmatrix ml_series_matrix(double alpha, double beta, const cmatrix& B);

cplx mittag_leffler_scalar(double alpha, ml_family family, cplx z);
cplx mittag_leffler_scalar(double alpha, double beta, cplx z);

/// Contour evaluation; B must be dissipative.
cmatrix mittag_leffler_matrix(double alpha, ml_family family, const cmatrix& B,
                              const hankel_contour& contour);
cmatrix mittag_leffler_matrix(double alpha, ml_family family, const cmatrix& B);

}  // namespace fracpar::specfun
