#pragma once

#include <cstddef>
#include <string>

#include "fracpar/types.hpp"

/// Data-parallel inner loops with a scalar reference and an AVX2 variant.
/// The active table is chosen once at first use from the CPU features;
/// FRACPAR_SIMD=scalar in the environment forces the reference path.
namespace fracpar::simd {

enum class isa { scalar, avx2 };

struct kernel_table {
    /// out[p] = sum_k coeff[k] * exp(i * y[p] * (xi0 + k*dxi)).
    void (*lattice_synthesis)(const double* y, std::size_t np, double xi0, double dxi,
                              const cplx* coeff, std::size_t nk, cplx* out);
    /// y[i] += a * x[i].
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    /// sum_i a[i] * b[i].
    double (*dot)(const double* a, const double* b, std::size_t n);
};

bool avx2_supported();
const kernel_table& table_for(isa which);
const kernel_table& active();
isa active_isa();
std::string isa_name(isa which);

namespace detail {
void lattice_synthesis_scalar(const double* y, std::size_t np, double xi0, double dxi,
                              const cplx* coeff, std::size_t nk, cplx* out);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
double dot_scalar(const double* a, const double* b, std::size_t n);

void lattice_synthesis_avx2(const double* y, std::size_t np, double xi0, double dxi,
                            const cplx* coeff, std::size_t nk, cplx* out);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
double dot_avx2(const double* a, const double* b, std::size_t n);
}  // namespace detail

}  // namespace fracpar::simd
