#include "fracpar/specfun.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/sin_pi.hpp>

#include "fracpar/error.hpp"
#include "fracpar/quadrature.hpp"

namespace fracpar {

fractional_order::fractional_order(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw config_error("fractional order must lie strictly between 0 and 1");
}

namespace specfun {

namespace {

constexpr int series_term_cap = 120;
constexpr double series_term_limit = 1e15;
constexpr double series_cancellation_limit = 1e4;

// log|1/Gamma(x)| with the sign of 1/Gamma(x) (sign 0 at poles).
double log_abs_rgamma(double x, int* sign) {
    if (x > 0.0) {
        *sign = 1;
        return -std::lgamma(x);
    }
    if (x == std::floor(x)) {
        *sign = 0;
        return -std::numeric_limits<double>::infinity();
    }
    const double s = boost::math::sin_pi(x);
    *sign = s > 0 ? 1 : -1;
    return std::lgamma(1.0 - x) + std::log(std::abs(s) / pi);
}

// Envelope of |1/Gamma(x)| that ignores the sine factor, used for stopping.
double log_rgamma_envelope(double x) {
    if (x > 0.0) return -std::lgamma(x);
    return std::lgamma(1.0 - x) - std::log(pi);
}

}  // namespace

double rgamma(double x) {
    int sign = 0;
    const double l = log_abs_rgamma(x, &sign);
    if (sign == 0) return 0.0;
    if (x > 0.0 && x < 170.0) return 1.0 / std::tgamma(x);
    return sign * std::exp(l);
}

double wright_series(double alpha, double mu, double z, bool* ok) {
    if (z == 0.0) {
        if (ok) *ok = true;
        return rgamma(mu);
    }
    const double lz = std::log(std::abs(z));
    const double zsign = z > 0 ? -1.0 : 1.0;  // sign of (-z)
    double sum = 0.0, max_term = 0.0, prev_env = std::numeric_limits<double>::infinity();
    bool good = true;
    int k = 0;
    for (;; ++k) {
        if (k > series_term_cap) {
            good = false;
            break;
        }
        const double x = mu - alpha * k;
        const double lkz = k * lz - std::lgamma(k + 1.0);
        int sign = 0;
        const double lr = log_abs_rgamma(x, &sign);
        const double env = std::exp(lkz + log_rgamma_envelope(x));
        if (env > series_term_limit) {
            good = false;
            break;
        }
        if (sign != 0) {
            const double term = ((k % 2 == 0) ? 1.0 : zsign) * sign * std::exp(lkz + lr);
            sum += term;
            max_term = std::max(max_term, std::abs(term));
        }
        if (k > 2 && env <= prev_env && env <= 1e-17 * std::max(std::abs(sum), 1e-300)) break;
        prev_env = env;
    }
    if (good && max_term > series_cancellation_limit * std::abs(sum)) good = false;
    if (ok) *ok = good;
    return sum;
}

namespace {

// Integral form for large z:
//   Phi(z) = z^p / (pi (1-alpha)) * int_0^pi A(phi) exp(-X A(phi)) dphi,  X = z^q,
// with A increasing from A(0) = (1-alpha) alpha^p.  The factor exp(-X A(0)) is
// kept apart and the range is cut where X (A - A(0)) exceeds 60.
struct zolotarev {
    double alpha, p, q, X, A0, upper;
    explicit zolotarev(double a, double z)
        : alpha(a), p(a / (1.0 - a)), q(1.0 / (1.0 - a)), X(std::pow(z, 1.0 / (1.0 - a))) {
        A0 = (1.0 - alpha) * std::pow(alpha, p);
        double lo = 0.0, hi = pi;
        {
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double v = X * (A(mid) - A0);
                if (!std::isfinite(v) || v > 60.0) hi = mid;
                else lo = mid;
            }
        }
        upper = hi;
    }
    double A(double phi) const {
        if (phi <= 0.0) return (1.0 - alpha) * std::pow(alpha, p);
        const double num = std::sin((1.0 - alpha) * phi) * std::pow(std::sin(alpha * phi), p);
        const double den = std::pow(std::sin(phi), q);
        return num / den;
    }
    // log of the prefactor exp(-X A0) and the scaled moment int A^m exp(-X (A - A0))
    double scaled_moment(int m) const {
        auto f = [&](double phi) {
            const double a = A(phi);
            const double e = X * (a - A0);
            if (!std::isfinite(a) || e > 745.0) return 0.0;
            return (m == 1 ? a : a * a) * std::exp(-e);
        };
        // smooth on [0, upper]; composite Gauss-Legendre with panel doubling
        auto composite = [&](int panels) {
            const quad::rule g = quad::composite_gauss_legendre(20, panels, 0.0, upper);
            double sum = 0.0;
            for (std::size_t i = 0; i < g.nodes.size(); ++i) sum += g.weights[i] * f(g.nodes[i]);
            return sum;
        };
        // the integrand carries roundoff of order X*A0*eps in its exponent
        const double tol = 1e-13 + 1e-15 * X * A0;
        double prev = composite(2);
        for (int panels = 4; panels <= 512; panels *= 2) {
            const double cur = composite(panels);
            if (std::abs(cur - prev) <= tol * std::abs(cur)) return cur;
            prev = cur;
        }
        throw evaluation_failure("wright_phi: integral form did not settle (alpha=" +
                                 std::to_string(alpha) + ", X=" + std::to_string(X) + ")");
    }
    double log_prefactor() const { return -X * A0; }
};

}  // namespace

double wright_phi_integral(double alpha, double z) {
    if (z <= 0.0) return rgamma(1.0 - alpha);
    zolotarev zo(alpha, z);
    const double lp = zo.log_prefactor() + zo.p * std::log(z);
    if (lp < -745.0) return 0.0;
    return std::exp(lp) * zo.scaled_moment(1) / (pi * (1.0 - alpha));
}

double wright_phi(double alpha, double z) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("wright_phi: alpha outside (0,1)");
    if (!(z >= 0.0)) throw precondition_error("wright_phi: argument must be nonnegative");
    bool ok = false;
    const double s = wright_series(alpha, 1.0 - alpha, z, &ok);
    if (ok) return s;
    const double v = wright_phi_integral(alpha, z);
    if (!std::isfinite(v)) throw evaluation_failure("wright_phi: integral form failed");
    return v;
}

double wright_phi_derivative(double alpha, double z) {
    if (!(z >= 0.0)) throw precondition_error("wright_phi_derivative: negative argument");
    bool ok = false;
    const double s = -wright_series(alpha, 1.0 - 2.0 * alpha, z, &ok);
    if (ok) return s;
    zolotarev zo(alpha, z);
    const double lp = zo.log_prefactor() + (zo.p - 1.0) * std::log(z);
    if (lp < -745.0) return 0.0;
    const double c = std::exp(lp) / (pi * (1.0 - alpha));
    const double v = c * (zo.p * zo.scaled_moment(1) - zo.q * std::pow(z, zo.q) * zo.scaled_moment(2));
    if (!std::isfinite(v)) throw evaluation_failure("wright_phi_derivative: integral form failed");
    return v;
}

double subordination_kernel(kernel_kind kind, double alpha, double t, double s) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("subordination_kernel: alpha outside (0,1)");
    if (!(t > 0.0)) throw precondition_error("subordination_kernel: t must be positive");
    if (!(s >= 0.0)) throw precondition_error("subordination_kernel: s must be nonnegative");
    const double ta = std::pow(t, -alpha);
    const double z = s * ta;
    bool ok = false;
    switch (kind) {
        case kernel_kind::phi:
            return ta * wright_phi(alpha, z);
        case kernel_kind::psi: {
            const double v = wright_series(alpha, 0.0, z, &ok);
            if (ok) return v / t;
            return alpha * z * wright_phi(alpha, z) / t;
        }
        case kernel_kind::nu: {
            const double v = wright_series(alpha, -alpha, z, &ok);
            if (ok) return ta * v / t;
            return -alpha * ta / t * (wright_phi(alpha, z) + z * wright_phi_derivative(alpha, z));
        }
    }
    return 0.0;
}

}  // namespace specfun
}  // namespace fracpar
