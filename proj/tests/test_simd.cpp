#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "fracpar/simd.hpp"

using namespace fracpar;

namespace {

std::vector<double> random_reals(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("scalar lattice synthesis matches a direct complex exponential sum") {
    const std::vector<double> y{0.0, 0.3, -1.7};
    const std::vector<cplx> c{{1.0, 0.5}, {-0.25, 2.0}, {0.0, -1.0}};
    std::vector<cplx> out(y.size());
    simd::detail::lattice_synthesis_scalar(y.data(), y.size(), -0.4, 0.4, c.data(), c.size(),
                                           out.data());
    for (std::size_t p = 0; p < y.size(); ++p) {
        cplx ref = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k)
            ref += c[k] * std::exp(cplx(0.0, y[p] * (-0.4 + 0.4 * k)));
        CHECK(std::abs(out[p] - ref) < 1e-15);
    }
}

TEST_CASE("avx2 lattice synthesis agrees with the scalar reference") {
    if (!simd::avx2_supported()) return;
    std::mt19937_64 rng(7);
    for (std::size_t np : {1u, 4u, 7u, 33u}) {
        for (std::size_t nk : {1u, 31u, 32u, 33u, 1000u}) {
            const auto y = random_reals(np, rng, -30.0, 30.0);
            const auto re = random_reals(nk, rng, -1.0, 1.0);
            const auto im = random_reals(nk, rng, -1.0, 1.0);
            std::vector<cplx> c(nk);
            double l1 = 0.0;
            for (std::size_t k = 0; k < nk; ++k) {
                c[k] = cplx(re[k], im[k]);
                l1 += std::abs(c[k]);
            }
            std::vector<cplx> a(np), b(np);
            simd::detail::lattice_synthesis_scalar(y.data(), np, -5.0, 0.01, c.data(), nk, a.data());
            simd::detail::lattice_synthesis_avx2(y.data(), np, -5.0, 0.01, c.data(), nk, b.data());
            for (std::size_t p = 0; p < np; ++p) CHECK(std::abs(a[p] - b[p]) <= 1e-12 * l1);
        }
    }
}

TEST_CASE("avx2 axpy and dot agree with the scalar reference") {
    if (!simd::avx2_supported()) return;
    std::mt19937_64 rng(11);
    for (std::size_t n : {0u, 1u, 3u, 8u, 13u, 1001u}) {
        const auto x = random_reals(n, rng, -2.0, 2.0);
        auto y1 = random_reals(n, rng, -2.0, 2.0);
        auto y2 = y1;
        simd::detail::axpy_scalar(0.7, x.data(), y1.data(), n);
        simd::detail::axpy_avx2(0.7, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
        const double d1 = simd::detail::dot_scalar(x.data(), y1.data(), n);
        const double d2 = simd::detail::dot_avx2(x.data(), y1.data(), n);
        CHECK(std::abs(d1 - d2) <= 1e-13 * (1.0 + std::abs(d1)) * std::sqrt(double(n) + 1));
    }
}

TEST_CASE("dispatch reports a usable table") {
    const auto& t = simd::active();
    CHECK(t.lattice_synthesis != nullptr);
    CHECK(t.axpy != nullptr);
    CHECK(t.dot != nullptr);
    const double a[3] = {1, 2, 3};
    CHECK(t.dot(a, a, 3) == 14.0);
}
