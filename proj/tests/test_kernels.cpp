#include <doctest.h>

#include <cmath>

#include "fracpar/error.hpp"
#include "fracpar/kernels.hpp"
#include "fracpar/quadrature.hpp"
#include "fracpar/specfun.hpp"

using namespace fracpar;

namespace {

constant_operator heat() { return {1, 1, 1, {{multi_index({2}), cmatrix::Constant(1, 1, -1.0)}}}; }
constant_operator biharmonic() { return {1, 1, 2, {{multi_index({4}), cmatrix::Constant(1, 1, -1.0)}}}; }
constant_operator coupled() {
    cmatrix a(2, 2);
    a << -1, 0.5, 0.2, -2;
    return {1, 2, 1, {{multi_index({2}), a}}};
}
constant_operator diagonal() {
    cmatrix a = cmatrix::Zero(2, 2);
    a(0, 0) = -1;
    a(1, 1) = -3;
    return {1, 2, 1, {{multi_index({2}), a}}};
}
constant_operator scalar_heat(double c) { return {1, 1, 1, {{multi_index({2}), cmatrix::Constant(1, 1, -c)}}}; }

double heat_fractional_closed_form(double alpha, double t, double x) {
    const double s = std::pow(t, -alpha / 2);
    return 0.5 * s * specfun::wright_phi(alpha / 2, std::abs(x) * s);
}

}  // namespace

TEST_CASE("classical kernel: heat closed form, unit mass, decoupling") {
    grid_spec g(1, 16.0, 128);
    const auto z = classical_fscp(heat(), 1.0, g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double x = g.point(p)[0];
        CHECK(std::abs(z.values[p](0, 0).real() - std::exp(-x * x / 4) / std::sqrt(4 * pi)) < 1e-8);
        CHECK(std::abs(z.values[p](0, 0).imag()) < 1e-12);
    }
    CHECK(std::abs(spatial_integral(z, 0)(0, 0) - 1.0) < 1e-8);
    const auto zd = classical_fscp(diagonal(), 0.7, g);
    const auto z1 = classical_fscp(scalar_heat(1), 0.7, g), z3 = classical_fscp(scalar_heat(3), 0.7, g);
    CHECK((spatial_integral(zd, 0) - cmatrix::Identity(2, 2)).norm() < 1e-8);
    for (std::size_t p = 0; p < g.size(); ++p) {
        CHECK(std::abs(zd.values[p](0, 0) - z1.values[p](0, 0)) < 1e-14);
        CHECK(std::abs(zd.values[p](1, 1) - z3.values[p](0, 0)) < 1e-14);
        CHECK(std::abs(zd.values[p](0, 1)) < 1e-14);
    }
}

TEST_CASE("classical kernel: cutoff refusal reports the needed cutoff") {
    grid_spec coarse(1, 16.0, 16);  // Nyquist pi/2
    try {
        classical_fscp(heat(), 0.01, coarse);
        FAIL("expected refusal");
    } catch (const cutoff_refusal& e) {
        CHECK(e.required_cutoff() == doctest::Approx(std::sqrt(28.0 / 0.01)));
    }
    CHECK_THROWS_AS(classical_fscp(heat(), -1.0, coarse), precondition_error);
}

TEST_CASE("classical kernel in two dimensions") {
    constant_operator h2(2, 1, 1, {{multi_index({2, 0}), cmatrix::Constant(1, 1, -1.0)},
                                   {multi_index({0, 2}), cmatrix::Constant(1, 1, -1.0)}});
    const auto z = classical_fscp(h2, 1.0, grid_spec(2, 10.0, 48));
    for (std::size_t p = 0; p < z.grid.size(); p += 7) {
        const auto x = z.grid.point(p);
        CHECK(std::abs(z.values[p](0, 0).real() - std::exp(-(x[0] * x[0] + x[1] * x[1]) / 4) / (4 * pi)) < 1e-10);
    }
    CHECK(std::abs(spatial_integral(z, 0)(0, 0) - 1.0) < 1e-8);
}

TEST_CASE("classical profile cutoff radius and spectral derivative") {
    classical_profile z(heat());
    CHECK(z.cutoff_radius() > 10.0);
    CHECK(z.cutoff_radius() < 0.4 * z.period());
    CHECK(std::abs(z({1.3})(0, 0).real() - std::exp(-1.69 / 4) / std::sqrt(4 * pi)) < 1e-13);
    // D = -i d/dx: D Z = -i * (-x/2) Z
    classical_profile dz(heat(), multi_index({1}));
    const double x = 0.9, g = std::exp(-x * x / 4) / std::sqrt(4 * pi);
    CHECK(std::abs(dz({x})(0, 0) - cplx(0, x / 2 * g)) < 1e-13);
}

TEST_CASE("Z_alpha for the heat operator matches the Wright-function closed form") {
    const double alpha = 0.6;
    grid_spec g(1, 10.0, 100);
    const std::vector<double> times{0.3, 1.0, 2.5};
    const auto f = fractional_kernel(heat(), alpha, field_kind::Z_alpha, times, g, kernel_route::subordination);
    int count = 0;
    double worst = 0.0;
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        for (std::size_t p = 0; p < g.size(); p += 6) {
            const double ex = heat_fractional_closed_form(alpha, times[ti], g.point(p)[0]);
            worst = std::max(worst, std::abs(f.at(ti, p)(0, 0) - ex) / ex);
            ++count;
        }
    CHECK(count >= 50);
    CHECK(worst < 1e-6);
    // the convenience entry point agrees
    const auto one = fractional_fscp_subordination(heat(), alpha, 1.0, g);
    CHECK(std::abs(one.at(0, 57)(0, 0) - f.at(1, 57)(0, 0)) < 1e-15);
}

TEST_CASE("normalizations of Z_alpha and Y_alpha") {
    grid_spec g(1, 40.0, 640);
    const std::vector<double> times{0.5, 1.0, 2.0};
    for (double alpha : {0.3, 0.5, 0.8}) {
        for (const auto& op : {heat(), coupled(), biharmonic()}) {
            const cmatrix I = cmatrix::Identity(op.N(), op.N());
            const auto z = fractional_kernel(op, alpha, field_kind::Z_alpha, times, g, kernel_route::subordination);
            const auto y = fractional_kernel(op, alpha, field_kind::Y_alpha, times, g, kernel_route::subordination);
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                CHECK((spatial_integral(z, ti) - I).cwiseAbs().maxCoeff() < 1e-6);
                const double ey = std::pow(times[ti], alpha - 1) / std::tgamma(alpha);
                CHECK((spatial_integral(y, ti) - ey * I).cwiseAbs().maxCoeff() < 1e-6);
            }
        }
    }
    const auto y = y_kernel(heat(), 0.5, 2.0, g, kernel_route::fourier);
    CHECK(std::abs(spatial_integral(y, 0)(0, 0).real() - 0.3989422804014327) < 1e-6);
}

TEST_CASE("route equivalence on R in [0.1, 10]") {
    grid_spec g(1, 12.0, 96);
    const std::vector<double> times{0.2, 1.0};
    const double alpha = 0.5;
    for (const auto& op : {heat(), coupled(), biharmonic()}) {
        for (auto kind : {field_kind::Z_alpha, field_kind::Y_alpha, field_kind::dtZ_alpha}) {
            const auto s = fractional_kernel(op, alpha, kind, times, g, kernel_route::subordination);
            const auto f = fractional_kernel(op, alpha, kind, times, g, kernel_route::fourier);
            int used = 0;
            for (std::size_t ti = 0; ti < times.size(); ++ti)
                for (std::size_t p = 0; p < g.size(); ++p) {
                    const double R = std::pow(times[ti], -alpha) * std::pow(std::abs(g.point(p)[0]), 2 * op.b());
                    if (R < 0.1 || R > 10) continue;
                    ++used;
                    CHECK((f.at(ti, p) - s.at(ti, p)).norm() <= 1e-5 * s.at(ti, p).norm());
                }
            CHECK(used > 10);
        }
    }
}

TEST_CASE("diagonal systems decouple into scalar fractional kernels") {
    grid_spec g(1, 8.0, 32);
    for (auto route : {kernel_route::subordination, kernel_route::fourier}) {
        const auto d = fractional_kernel(diagonal(), 0.4, field_kind::Y_alpha, {1.0}, g, route);
        const auto a = fractional_kernel(scalar_heat(1), 0.4, field_kind::Y_alpha, {1.0}, g, route);
        const auto b = fractional_kernel(scalar_heat(3), 0.4, field_kind::Y_alpha, {1.0}, g, route);
        for (std::size_t p = 0; p < g.size(); ++p) {
            CHECK(std::abs(d.at(0, p)(0, 0) - a.at(0, p)(0, 0)) < 1e-12);
            CHECK(std::abs(d.at(0, p)(1, 1) - b.at(0, p)(0, 0)) < 1e-12);
            CHECK(std::abs(d.at(0, p)(1, 0)) < 1e-12);
        }
    }
}

TEST_CASE("zero frequency of the Fourier symbol") {
    // E_alpha(0) = I: the x-integral of the Fourier-route Z_alpha is I by the DC term.
    grid_spec g(1, 20.0, 320);
    const auto f = fractional_fscp_fourier(coupled(), 0.7, 1.0, g, specfun::hankel_contour::standard(0.7));
    CHECK((spatial_integral(f, 0) - cmatrix::Identity(2, 2)).norm() < 1e-6);
    CHECK(kind_ml_beta(field_kind::Z_alpha, 0.3) == 1.0);
    CHECK(kind_ml_beta(field_kind::Y_alpha, 0.3) == 0.3);
    CHECK(kind_ml_beta(field_kind::dtZ_alpha, 0.3) == 0.0);
    CHECK(kind_ml_beta(field_kind::Y_alpha_int2, 0.3) == 2.3);
}

TEST_CASE("dt Z_alpha against finite differences in t and zero mass") {
    const double alpha = 0.5, x = 1.0;
    grid_spec g(1, 2.0, 4);  // x = 1 is grid index 3
    const std::size_t p = 3;
    REQUIRE(g.point(p)[0] == doctest::Approx(x));
    const auto d = dt_z_kernel(heat(), alpha, 1.0, g);
    auto fd = [&](double h) {
        const auto z = fractional_kernel(heat(), alpha, field_kind::Z_alpha, {1.0 - h, 1.0 + h}, g,
                                         kernel_route::subordination);
        return (z.at(1, p)(0, 0).real() - z.at(0, p)(0, 0).real()) / (2 * h);
    };
    const double rich = (4 * fd(0.01) - fd(0.02)) / 3;
    CHECK(std::abs(d.at(0, p)(0, 0).real() - rich) <= 1e-4 * std::abs(rich));
    grid_spec fine(1, 24.0, 768);
    const auto dz = fractional_kernel(heat(), alpha, field_kind::dtZ_alpha, {0.5, 1.0}, fine, kernel_route::subordination);
    for (std::size_t ti = 0; ti < 2; ++ti) CHECK(std::abs(spatial_integral(dz, ti)(0, 0)) < 1e-6);
}

TEST_CASE("even symbols give even kernels") {
    grid_spec g(1, 6.0, 48);
    for (auto route : {kernel_route::subordination, kernel_route::fourier}) {
        const auto f = fractional_kernel(coupled(), 0.6, field_kind::Z_alpha, {0.7}, g, route);
        for (int i = 1; i < 24; ++i) {
            const auto& a = f.at(0, g.ravel({24 + i}));
            const auto& b = f.at(0, g.ravel({24 - i}));
            CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + a.norm()));
        }
    }
}

TEST_CASE("singular points are flagged, not computed") {
    grid_spec g(1, 4.0, 16);
    const auto f = fractional_kernel(heat(), 0.5, field_kind::Z_alpha, {1.0}, g, kernel_route::subordination,
                                     multi_index({2}));
    CHECK(f.singular[8] == 1);
    CHECK(f.at(0, 8).norm() == 0.0);
    CHECK(f.singular[7] == 0);
    const auto ok = fractional_kernel(heat(), 0.5, field_kind::Z_alpha, {1.0}, g, kernel_route::subordination);
    CHECK(ok.singular[8] == 0);
}

TEST_CASE("elliptic Green matrix") {
    for (double x : {0.3, 1.0, 2.5}) CHECK(std::abs(elliptic_green(heat(), {x})(0, 0).real() - 0.5 * std::exp(-x)) < 1e-8);
    CHECK(std::abs(elliptic_green(heat(), {1.0})(0, 0).real() - 0.1839397206) < 1e-8);
    CHECK_THROWS_AS(elliptic_green(heat(), {0.0}), singular_point);
    // op scaled by s: G_s(x) = (1/s) int e^{-tau/s} Z(tau, x) d tau = e^{-|x|/sqrt s}/(2 sqrt s)
    for (double s : {0.5, 2.0}) {
        const double v = elliptic_green(heat().scaled(s), {1.2})(0, 0).real();
        CHECK(std::abs(v - std::exp(-1.2 / std::sqrt(s)) / (2 * std::sqrt(s))) < 1e-8);
    }
    // two dimensions: K_0(|x|)/(2 pi)
    constant_operator h2(2, 1, 1, {{multi_index({2, 0}), cmatrix::Constant(1, 1, -1.0)},
                                   {multi_index({0, 2}), cmatrix::Constant(1, 1, -1.0)}});
    CHECK(std::abs(elliptic_green(h2, {0.6, 0.8})(0, 0).real() - 0.421024438240708333 / (2 * pi)) < 1e-8);
}

TEST_CASE("two-dimensional fractional kernel: routes agree, origin flagged") {
    constant_operator h2(2, 1, 1, {{multi_index({2, 0}), cmatrix::Constant(1, 1, -1.0)},
                                   {multi_index({0, 2}), cmatrix::Constant(1, 1, -1.0)}});
    grid_spec g(2, 2.0, 4);
    const auto s = fractional_kernel(h2, 0.5, field_kind::Z_alpha, {1.0}, g, kernel_route::subordination);
    const auto f = fractional_kernel(h2, 0.5, field_kind::Z_alpha, {1.0}, g, kernel_route::fourier);
    const std::size_t origin = g.ravel({2, 2});
    CHECK(s.singular[origin] == 1);
    CHECK(f.singular[origin] == 1);
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (p == origin) continue;
        CHECK(std::abs(s.at(0, p)(0, 0) - f.at(0, p)(0, 0)) <= 1e-6 * std::abs(s.at(0, p)(0, 0)));
    }
}

TEST_CASE("argument validation") {
    grid_spec g(1, 4.0, 8);
    CHECK_THROWS_AS(fractional_kernel(heat(), 1.0, field_kind::Z_alpha, {1.0}, g, kernel_route::subordination), config_error);
    CHECK_THROWS_AS(fractional_kernel(heat(), 0.5, field_kind::Z_alpha, {0.0}, g, kernel_route::subordination),
                    precondition_error);
    CHECK_THROWS_AS(fractional_kernel(heat(), 0.5, field_kind::Z_alpha, {1.0}, grid_spec(2, 4.0, 8),
                                      kernel_route::subordination),
                    config_error);
    CHECK_THROWS_AS(fractional_kernel(heat().scaled(-1), 0.5, field_kind::Z_alpha, {1.0}, g, kernel_route::fourier),
                    parabolicity_error);
}

TEST_CASE("time-integrated Y families match quadrature of Y in t") {
    const double alpha = 0.5, s = 0.8;
    for (const auto& op : {heat(), coupled()})
        for (int order = 0; order <= 2; ++order) {
            const multi_index beta({order});
            auto y = make_fourier_profile(op, alpha, field_kind::Y_alpha, beta, 60.0);
            auto y1 = make_fourier_profile(op, alpha, alpha + 1.0, beta, 10.0);
            auto y2 = make_fourier_profile(op, alpha, alpha + 2.0, beta, 10.0);
            for (double x : {0.4, 1.0, 2.0}) {
                // tau = s e^{-v}; Y(tau, x) is negligible once the scaled point passes 60.
                const double vmax = std::log(s * std::pow(60.0 / x, 2.0 / alpha));
                const auto q = quad::composite_gauss_legendre(16, 60, 0.0, vmax);
                std::vector<std::vector<double>> pts;
                std::vector<double> taus;
                for (double v : q.nodes) {
                    const double tau = s * std::exp(-v);
                    taus.push_back(tau);
                    pts.push_back({std::min(60.0, std::pow(tau, -alpha / 2) * x)});
                }
                std::vector<cmatrix> vals;
                std::vector<unsigned char> sg;
                y->evaluate(pts, vals, sg);
                cmatrix i1 = cmatrix::Zero(op.N(), op.N()), i2 = i1;
                for (std::size_t k = 0; k < taus.size(); ++k) {
                    const cmatrix yv = vals[k] * std::pow(taus[k], ml_time_exponent(alpha, alpha, 1, 1, order));
                    i1 += yv * (q.weights[k] * taus[k]);
                    i2 += yv * (q.weights[k] * taus[k] * (s - taus[k]));
                }
                std::vector<cmatrix> a, b;
                y1->evaluate({{std::pow(s, -alpha / 2) * x}}, a, sg);
                y2->evaluate({{std::pow(s, -alpha / 2) * x}}, b, sg);
                a[0] *= std::pow(s, ml_time_exponent(alpha + 1, alpha, 1, 1, order));
                b[0] *= std::pow(s, ml_time_exponent(alpha + 2, alpha, 1, 1, order));
                CAPTURE(order);
                CAPTURE(x);
                CHECK((a[0] - i1).cwiseAbs().maxCoeff() < 1e-9);
                CHECK((b[0] - i2).cwiseAbs().maxCoeff() < 1e-9);
            }
        }
    const auto f = fractional_kernel(heat(), alpha, field_kind::Y_alpha_int1, {s}, grid_spec(1, 4.0, 16),
                                     kernel_route::fourier);
    CHECK(f.kind == field_kind::Y_alpha_int1);
    CHECK_THROWS_AS(fractional_kernel(heat(), alpha, field_kind::Y_alpha_int2, {s}, grid_spec(1, 4.0, 16),
                                      kernel_route::subordination),
                    unsupported_region);
}
