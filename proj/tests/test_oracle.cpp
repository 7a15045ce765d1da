#include <doctest.h>

#include <cmath>

#include "fracpar/error.hpp"
#include "fracpar/kernels.hpp"
#include "fracpar/oracle.hpp"
#include "fracpar/specfun.hpp"
#include "fracpar/system_io.hpp"

using namespace fracpar;

namespace {

constant_operator heat() { return {1, 1, 1, {{multi_index({2}), cmatrix::Constant(1, 1, -1.0)}}}; }

variable_system variable_heat() {
    return parse_system(nlohmann::json::parse(
                            R"J({"n":1,"N":1,"b":1,"principal":[{"beta":[2],"matrix":"-(1+0.5*sin(x))"}],
                                "holder":{"exponent":1,"constant":0.5},"bound":1.5})J"))
        .system;
}

variable_system coupled_with_lower() {
    return parse_system(nlohmann::json::parse(
                            R"J({"n":1,"N":2,"b":1,
                                "principal":[{"beta":[2],"matrix":[[-1,0.5],[0.2,"-(2+0.3*cos(x))"]]}],
                                "lower":[{"beta":[1],"matrix":[[0.1,0],[0,0]]}],
                                "holder":{"exponent":1,"constant":0.5},"bound":3})J"))
        .system;
}

std::vector<double> powers(double sigma, double dt, int k) {
    std::vector<double> u(k + 1);
    for (int j = 0; j <= k; ++j) u[j] = std::pow(j * dt, sigma);
    return u;
}

double sup_abs(const cmatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("L1 weights are positive and decreasing") {
    const auto s = stepping_scheme::make(0.4, 0.01, 500, false);
    CHECK(s.weights[0] == doctest::Approx(1.0 / std::tgamma(1.6)).epsilon(1e-14));
    for (std::size_t j = 1; j < s.weights.size(); ++j) {
        CHECK(s.weights[j] > 0.0);
        CHECK(s.weights[j] < s.weights[j - 1]);
    }
    CHECK(!s.corrected());
    CHECK_THROWS_AS(stepping_scheme::make(0.4, 0.0, 10), precondition_error);
    CHECK_THROWS_AS(stepping_scheme::make(1.0, 0.1, 10), config_error);
}

TEST_CASE("L1 of constants vanishes and L1 of t is exact") {
    const auto s = stepping_scheme::make(0.5, 0.05, 20, false);
    CHECK(caputo_l1(std::vector<double>(21, 3.7), s) == 0.0);
    CHECK(caputo_l1(powers(1.0, 0.05, 20), s) == doctest::Approx(1.1283791670955126).epsilon(1e-13));
    CHECK_THROWS_AS(caputo_l1({1.0}, s), precondition_error);
}

TEST_CASE("L1 of t^2 converges at rate 2 - alpha") {
    const double alpha = 0.5, exact = 2.0 / std::tgamma(2.5);
    std::vector<double> err;
    for (int K : {20, 40, 80, 160, 320}) {
        const auto s = stepping_scheme::make(alpha, 1.0 / K, K, false);
        err.push_back(std::abs(caputo_l1(powers(2.0, 1.0 / K, K), s) - exact));
    }
    const auto r = observed_orders(err);
    CHECK(r.back() == doctest::Approx(1.5).epsilon(0.03));
}

TEST_CASE("starting corrections make the rule exact on t^sigma") {
    for (double alpha : {0.3, 0.5, 0.7}) {
        const auto s = stepping_scheme::make(alpha, 0.02, 50);
        REQUIRE(s.corrected());
        for (double sg : s.sigmas)
            for (int k : {static_cast<int>(s.sigmas.size()), 7, 50}) {
                const double exact = std::tgamma(sg + 1) / std::tgamma(sg + 1 - alpha) * std::pow(k * 0.02, sg - alpha);
                CHECK(caputo_corrected(powers(sg, 0.02, k), s) == doctest::Approx(exact).epsilon(1e-10));
            }
    }
    CHECK(stepping_scheme::make(0.5, 0.1, 10).sigmas == std::vector<double>{0.5});
}

TEST_CASE("fractional ODE reproduces E_alpha(lambda t^alpha) with order at least 1.3") {
    struct run {
        double alpha;
        std::vector<int> steps;
    };
    for (const auto& rc : {run{0.3, {640, 1280, 2560}}, run{0.5, {80, 160, 320}}, run{0.7, {80, 160, 320}}}) {
        std::vector<double> err;
        const double exact = specfun::mittag_leffler_scalar(rc.alpha, 1.0, cplx(-1.0, 0.0)).real();
        for (int K : rc.steps) {
            const auto s = stepping_scheme::make(rc.alpha, 1.0 / K, K);
            const auto U = solve_linear_fode(cmatrix::Constant(1, 1, -1.0), cvector::Constant(1, 1.0), {}, s);
            err.push_back(std::abs(U[K](0) - exact));
        }
        const auto r = observed_orders(err);
        CAPTURE(rc.alpha);
        CHECK(r.back() >= 1.3);
        CHECK(r.back() <= 2.0 - rc.alpha + 0.2);
        CHECK(err.back() < 5e-5);
    }
}

TEST_CASE("matrix fractional ODE matches the matrix Mittag-Leffler function") {
    cmatrix A(2, 2);
    A << -1.0, 0.4, -0.3, -2.0;
    cvector u0(2);
    u0 << 1.0, -0.5;
    const int K = 400;
    const auto U = solve_linear_fode(A, u0, {}, stepping_scheme::make(0.6, 1.0 / K, K));
    const cvector exact = specfun::mittag_leffler_matrix(0.6, specfun::ml_family::one, A) * u0;
    CHECK((U[K] - exact).norm() < 1e-4);
}

TEST_CASE("zero data gives the exactly zero trajectory") {
    const grid_spec g(1, pi, 64);
    for (double alpha : {0.3, 0.5, 0.8}) {
        const auto sys = coupled_with_lower();
        const auto tr = solve_ivp(sys, sampled_field::Zero(2, g.size()), {}, 1.0, 30, g, alpha);
        for (const auto& u : tr.values) CHECK(sup_abs(u) == 0.0);
    }
}

TEST_CASE("constant source gives c t^alpha / Gamma(1 + alpha)") {
    const grid_spec g(1, pi, 32);
    const auto tr = solve_ivp(variable_heat(), sampled_field::Zero(1, g.size()),
                              [](double, const std::vector<double>&) { return cvector::Constant(1, 2.0); }, 1.0,
                              200, g, 0.5);
    for (std::size_t k = 50; k < tr.times.size(); k += 50) {
        const double exact = 2.0 * std::pow(tr.times[k], 0.5) / std::tgamma(1.5);
        CHECK(sup_abs(tr.values[k] - sampled_field::Constant(1, g.size(), exact)) < 1e-4);
    }
}

TEST_CASE("mass is conserved for the homogeneous constant-coefficient system") {
    const grid_spec g(1, 8.0, 128);
    const auto u0 = sample_field(g, 1, [](const std::vector<double>& x) {
        return cvector::Constant(1, std::exp(-x[0] * x[0]));
    });
    const double T = 1.0;
    const auto tr = solve_ivp(variable_system::from_constant(heat()), u0, {}, T, 100, g, 0.5);
    const double m0 = tr.values.front().sum().real();
    for (const auto& u : tr.values) CHECK(std::abs(u.sum().real() - m0) * g.spacing() <= 1e-6 * T);
}

TEST_CASE("separable manufactured solution E_alpha(lambda_h t^alpha) sin x") {
    // On a periodic grid sin x is an eigenvector of the difference Laplacian with eigenvalue lambda_h.
    const int M = 32;
    const grid_spec g(1, pi, M);
    const double h = g.spacing(), lambda_h = (2.0 * std::cos(h) - 2.0) / (h * h);
    const auto u0 = sample_field(g, 1, [](const std::vector<double>& x) { return cvector::Constant(1, std::sin(x[0])); });
    for (double alpha : {0.5, 0.7}) {
        std::vector<double> err;
        const double e = specfun::mittag_leffler_scalar(alpha, 1.0, cplx(lambda_h, 0.0)).real();
        for (int K : {80, 160, 320}) {
            const auto tr = solve_ivp(variable_system::from_constant(heat()), u0, {}, 1.0, K, g, alpha);
            err.push_back(sup_abs(tr.values.back() - e * u0));
        }
        CAPTURE(alpha);
        const auto r = observed_orders(err);
        CHECK(r.back() >= 1.3);
        CHECK(r.back() <= 2.0 - alpha + 0.2);
    }
}

TEST_CASE("heat problem agrees with the Z_alpha convolution of a narrow Gaussian") {
    const double alpha = 0.5, T = 0.5;
    const int M = 256;
    const grid_spec g(1, 8.0, M);
    const auto gauss = [](double x) { return std::exp(-x * x / (2 * 0.3 * 0.3)); };
    const auto u0 = sample_field(g, 1, [&](const std::vector<double>& x) { return cvector::Constant(1, gauss(x[0])); });
    const auto tr = solve_ivp(variable_system::from_constant(heat()), u0, {}, T, 200, g, alpha);
    const auto z = fractional_kernel(heat(), alpha, field_kind::Z_alpha, {T}, grid_spec(1, 16.0, 2 * M),
                                     kernel_route::fourier);
    double worst = 0.0;
    for (int i = 0; i < M; ++i) {
        double u = 0.0;
        for (int j = 0; j < M; ++j) u += z.values[i - j + M](0, 0).real() * gauss(g.coordinate(j)) * g.spacing();
        worst = std::max(worst, std::abs(u - tr.values.back()(0, i).real()));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("weak PDE residual of the Z_alpha convolution decreases under refinement") {
    const double alpha = 0.5, T = 0.5;
    const auto v = [](double x) { return std::exp(-x * x); };
    std::vector<double> res;
    for (int level = 0; level < 3; ++level) {
        const int M = 64 << level, K = 40 << level;
        const grid_spec g(1, 6.0, M);
        std::vector<double> times;
        for (int k = 1; k <= K; ++k) times.push_back(T * k / K);
        const auto z = fractional_kernel(heat(), alpha, field_kind::Z_alpha, times, grid_spec(1, 12.0, 2 * M),
                                         kernel_route::fourier);
        // u(t_k, x_i) for k = 0..K on the grid.
        std::vector<std::vector<double>> u(K + 1, std::vector<double>(M));
        for (int i = 0; i < M; ++i) u[0][i] = v(g.coordinate(i));
        for (int k = 1; k <= K; ++k)
            for (int i = 0; i < M; ++i) {
                double s = 0.0;
                for (int j = 0; j < M; ++j)
                    s += z.values[(k - 1) * 2 * M + i - j + M](0, 0).real() * u[0][j] * g.spacing();
                u[k][i] = s;
            }
        const auto scheme = stepping_scheme::make(alpha, T / K, K);
        const double h = g.spacing();
        double worst = 0.0;
        for (int i = M / 4; i < 3 * M / 4; ++i) {
            std::vector<double> hist(K + 1);
            for (int k = 0; k <= K; ++k) hist[k] = u[k][i];
            const double lap = (u[K][i + 1] - 2 * u[K][i] + u[K][i - 1]) / (h * h);
            worst = std::max(worst, std::abs(caputo_corrected(hist, scheme) - lap));
        }
        res.push_back(worst);
    }
    CAPTURE(res[0]);
    CAPTURE(res[1]);
    CAPTURE(res[2]);
    CHECK(res[1] < 0.5 * res[0]);
    CHECK(res[2] < 0.5 * res[1]);
}
