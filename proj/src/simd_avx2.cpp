#include "fracpar/simd.hpp"

#include <cmath>
#include <immintrin.h>

namespace fracpar::simd::detail {

namespace {
// Rotation recurrence is reseeded with exact sincos this often to bound drift.
constexpr std::size_t reseed_every = 32;
}  // namespace

__attribute__((target("avx2,fma")))
void lattice_synthesis_avx2(const double* y, std::size_t np, double xi0, double dxi,
                            const cplx* coeff, std::size_t nk, cplx* out) {
    std::size_t p = 0;
    for (; p + 4 <= np; p += 4) {
        alignas(32) double zr_a[4], zi_a[4], wr_a[4], wi_a[4];
        for (int l = 0; l < 4; ++l) {
            wr_a[l] = std::cos(y[p + l] * dxi);
            wi_a[l] = std::sin(y[p + l] * dxi);
        }
        const __m256d wr = _mm256_load_pd(wr_a);
        const __m256d wi = _mm256_load_pd(wi_a);
        __m256d acc_r = _mm256_setzero_pd();
        __m256d acc_i = _mm256_setzero_pd();
        __m256d zr = _mm256_setzero_pd(), zi = _mm256_setzero_pd();
        for (std::size_t k = 0; k < nk; ++k) {
            if (k % reseed_every == 0) {
                const double xi = xi0 + static_cast<double>(k) * dxi;
                for (int l = 0; l < 4; ++l) {
                    zr_a[l] = std::cos(y[p + l] * xi);
                    zi_a[l] = std::sin(y[p + l] * xi);
                }
                zr = _mm256_load_pd(zr_a);
                zi = _mm256_load_pd(zi_a);
            }
            const __m256d cr = _mm256_set1_pd(coeff[k].real());
            const __m256d ci = _mm256_set1_pd(coeff[k].imag());
            acc_r = _mm256_fmadd_pd(cr, zr, acc_r);
            acc_r = _mm256_fnmadd_pd(ci, zi, acc_r);
            acc_i = _mm256_fmadd_pd(cr, zi, acc_i);
            acc_i = _mm256_fmadd_pd(ci, zr, acc_i);
            // z <- z * w
            const __m256d nzr = _mm256_fmsub_pd(zr, wr, _mm256_mul_pd(zi, wi));
            const __m256d nzi = _mm256_fmadd_pd(zr, wi, _mm256_mul_pd(zi, wr));
            zr = nzr;
            zi = nzi;
        }
        alignas(32) double ar[4], ai[4];
        _mm256_store_pd(ar, acc_r);
        _mm256_store_pd(ai, acc_i);
        for (int l = 0; l < 4; ++l) out[p + l] = cplx(ar[l], ai[l]);
    }
    if (p < np) lattice_synthesis_scalar(y + p, np - p, xi0, dxi, coeff, nk, out + p);
}

__attribute__((target("avx2,fma")))
void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma")))
double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
    }
    s0 = _mm256_add_pd(s0, s1);
    alignas(32) double t[4];
    _mm256_store_pd(t, s0);
    double s = (t[0] + t[1]) + (t[2] + t[3]);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace fracpar::simd::detail
