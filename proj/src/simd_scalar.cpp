#include "fracpar/simd.hpp"

#include <cmath>

namespace fracpar::simd::detail {

void lattice_synthesis_scalar(const double* y, std::size_t np, double xi0, double dxi,
                              const cplx* coeff, std::size_t nk, cplx* out) {
    for (std::size_t p = 0; p < np; ++p) {
        double re = 0.0, im = 0.0;
        for (std::size_t k = 0; k < nk; ++k) {
            const double ph = y[p] * (xi0 + static_cast<double>(k) * dxi);
            const double c = std::cos(ph), s = std::sin(ph);
            re += coeff[k].real() * c - coeff[k].imag() * s;
            im += coeff[k].real() * s + coeff[k].imag() * c;
        }
        out[p] = cplx(re, im);
    }
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace fracpar::simd::detail
