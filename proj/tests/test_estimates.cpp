#include <doctest.h>

#include <cmath>
#include <set>

#include "fracpar/error.hpp"
#include "fracpar/estimates.hpp"
#include "fracpar/system_io.hpp"

using namespace fracpar;

namespace {

constant_operator heat() { return {1, 1, 1, {{multi_index({2}), cmatrix::Constant(1, 1, -1.0)}}}; }
constant_operator biharmonic() { return {1, 1, 2, {{multi_index({4}), cmatrix::Constant(1, 1, -1.0)}}}; }
constant_operator coupled() {
    cmatrix a(2, 2);
    a << -1, 0.5, 0.2, -2;
    return {1, 2, 1, {{multi_index({2}), a}}};
}

const double alpha = 0.5;

certify_options options() {
    certify_options o;
    o.alpha = alpha;
    return o;
}

kernel_field field(const constant_operator& op, field_kind kind, int order) {
    return fractional_kernel(op, alpha, kind, log_uniform_times(1e-2, 1.0, 10), grid_spec(1, 8.0, 512),
                             kernel_route::fourier, multi_index({order}));
}

variable_system variable_heat() {
    return parse_system(nlohmann::json::parse(
                            R"J({"n":1,"N":1,"b":1,"principal":[{"beta":[2],"matrix":"-(1+0.5*sin(x))"}],
                                "holder":{"exponent":1,"constant":0.5},"bound":1.5})J"))
        .system;
}

}  // namespace

TEST_CASE("scaling quantities") {
    const auto s = scaling(0.5, 1, 4.0, 2.0);
    CHECK(s.R == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s.rho == doctest::Approx(1.5874010519681994).epsilon(1e-12));
    CHECK_THROWS_AS(scaling(0.5, 1, 0.0, 1.0), precondition_error);
}

TEST_CASE("case selection is total and unambiguous") {
    for (int n = 1; n <= 3; ++n)
        for (int b = 1; b <= 2; ++b)
            for (int k = 0; k <= 2 * b; ++k)
                for (auto kind : {field_kind::Z_alpha, field_kind::Y_alpha}) {
                    const auto cases = applicable_cases(kind, n, b, k, alpha);
                    REQUIRE(cases.size() == 3);
                    std::set<std::string> labels;
                    for (const auto& c : cases) labels.insert(c.label);
                    CHECK(labels.size() == 3);
                    // The far clauses all carry the exponential; the near clauses never do.
                    CHECK(cases[0].form.exponential);
                    CHECK(!cases[1].form.exponential);
                    CHECK(cases[2].form.exponential);
                    // Near-regime x singularity appears exactly when n + |beta| > 2b.
                    CHECK((cases[1].form.x_power < 0) == (n + k > 2 * b));
                }
    CHECK(applicable_cases(field_kind::dtZ_alpha, 1, 1, 0, alpha).size() == 2);
    CHECK(applicable_cases(field_kind::dtZ_alpha, 1, 1, 1, alpha).empty());
    CHECK_THROWS_AS(select_case(field_kind::Z, 1, 1, 0, regime::far, alpha), precondition_error);
}

TEST_CASE("known clause shapes") {
    const auto z = select_case(field_kind::Z_alpha, 1, 1, 0, regime::far, alpha);
    CHECK(z.form.t_power == doctest::Approx(-0.25));
    const auto y = select_case(field_kind::Y_alpha, 1, 1, 0, regime::near, alpha);
    CHECK(y.form.t_power == doctest::Approx(-0.75));
    const auto crit = select_case(field_kind::Z_alpha, 2, 1, 0, regime::near, alpha);
    CHECK(crit.form.log_factor);
    CHECK(crit.form.t_power == doctest::Approx(-alpha));
    const auto yc = select_case(field_kind::Y_alpha, 1, 2, 3, regime::near, alpha);
    CHECK(yc.form.t_power == doctest::Approx(-1.0));
    CHECK(!yc.form.log_factor);
}

TEST_CASE("every clause passes for the three test operators, sigma > 0 where exponential") {
    for (const auto& op : {heat(), coupled(), biharmonic()}) {
        for (auto kind : {field_kind::Z_alpha, field_kind::Y_alpha, field_kind::dtZ_alpha}) {
            const int kmax = kind == field_kind::dtZ_alpha ? 0 : 2 * op.b();
            for (int k = 0; k <= kmax; ++k) {
                const auto f = field(op, kind, k);
                for (const auto& c : applicable_cases(kind, 1, op.b(), k, alpha)) {
                    CAPTURE(c.label);
                    CAPTURE(op.N());
                    const auto r = certify_bound(f, c, options());
                    CHECK(r.pass);
                    CHECK(r.sample_count >= 100);
                    if (c.form.exponential) CHECK(r.fitted_sigma > 0.0);
                }
            }
        }
    }
}

TEST_CASE("a shape claiming faster decay than the kernel is rejected") {
    const auto f = field(heat(), field_kind::Z_alpha, 0);
    auto c = select_case(field_kind::Z_alpha, 1, 1, 0, regime::near, alpha);
    c.form.t_power += 0.3;
    const auto r = certify_bound(f, c, options());
    CHECK(!r.pass);
    CHECK(r.sup_ratio > 1.5);
    auto far = select_case(field_kind::Z_alpha, 1, 1, 0, regime::far, alpha);
    far.form.t_power += 0.3;
    CHECK(!certify_bound(f, far, options()).pass);
}

TEST_CASE("sup ratio does not grow on a subset") {
    const auto f = field(coupled(), field_kind::Y_alpha, 1);
    const auto c = select_case(field_kind::Y_alpha, 1, 1, 1, regime::unified, alpha);
    const auto r = certify_bound(f, c, options());
    const auto all = samples_from_field(f);
    std::vector<bound_sample> odd, late;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (i % 2) odd.push_back(all[i]);
        if (all[i].t > 0.1) late.push_back(all[i]);
    }
    const double full = evaluate_ratio(r, all, alpha);
    CHECK(full == doctest::Approx(r.sup_ratio).epsilon(1e-9));
    CHECK(evaluate_ratio(r, odd, alpha) <= full);
    CHECK(evaluate_ratio(r, late, alpha) <= full);
}

TEST_CASE("unified report passes whenever both regime reports pass") {
    for (const auto& op : {heat(), coupled(), biharmonic()})
        for (int k = 0; k <= 2; ++k) {
            const auto f = field(op, field_kind::Z_alpha, k);
            const auto far = certify_bound(f, select_case(field_kind::Z_alpha, 1, op.b(), k, regime::far, alpha), options());
            const auto near = certify_bound(f, select_case(field_kind::Z_alpha, 1, op.b(), k, regime::near, alpha), options());
            const auto uni = certify_bound(f, select_case(field_kind::Z_alpha, 1, op.b(), k, regime::unified, alpha), options());
            if (far.pass && near.pass) CHECK(uni.pass);
        }
}

TEST_CASE("samples confined to R <= 1 give sigma = 0 with a note") {
    std::vector<bound_sample> s;
    for (int i = 1; i <= 200; ++i) {
        const double t = 0.5 + 0.0025 * i, x = 0.001 * i;
        s.push_back({t, x, std::pow(t, -0.25)});
    }
    const auto r = certify_bound(s, select_case(field_kind::Z_alpha, 1, 1, 0, regime::unified, alpha), options());
    CHECK(r.fitted_sigma == 0.0);
    CHECK(!r.note.empty());
    CHECK(r.pass);
}

TEST_CASE("too few samples and zero fields") {
    std::vector<bound_sample> few(10, bound_sample{0.5, 2.0, 1.0});
    CHECK_THROWS_AS(certify_bound(few, select_case(field_kind::Z_alpha, 1, 1, 0, regime::far, alpha), options()),
                    insufficient_data);
    std::vector<bound_sample> zero(10, bound_sample{0.5, 2.0, 0.0});
    const auto r = certify_bound(zero, select_case(field_kind::Z_alpha, 1, 1, 0, regime::far, alpha), options());
    CHECK(r.pass);
    CHECK(r.fitted_C == 0.0);
}

TEST_CASE("difference field vanishes for constant coefficients") {
    const auto sys = variable_system::from_constant(coupled());
    difference_options d;
    d.times = log_uniform_times(1e-2, 1.0, 4);
    const auto s = difference_samples(sys, alpha, {{{0.0}, {1.0}}}, field_kind::Z_alpha, 1, d);
    for (const auto& v : s) CHECK(v.value == 0.0);
}

TEST_CASE("Holder difference bound for a variable coefficient") {
    difference_options d;
    d.times = log_uniform_times(1e-2, 1.0, 10);
    d.grid = grid_spec(1, 8.0, 256);
    const point_pairs pairs{{{0.0}, {0.3}}, {{1.0}, {2.0}}};
    for (int k = 0; k <= 2; ++k)
        for (auto kind : {field_kind::Z_alpha, field_kind::Y_alpha}) {
            const auto samples = difference_samples(variable_heat(), alpha, pairs, kind, k, d);
            for (const auto& c : applicable_cases(kind, 1, 1, k, alpha)) {
                CAPTURE(c.label);
                const auto r = certify_bound(samples, c, options());
                CHECK(r.pass);
                if (c.form.exponential) CHECK(r.fitted_sigma > 0.0);
            }
        }
}

TEST_CASE("parametrix time-derivative integral: zero for constant coefficients, bounded otherwise") {
    std::vector<double> xs;
    for (int i = -3; i <= 3; ++i) xs.push_back(0.75 * i);
    auto opt = options();
    opt.min_samples = 50;
    const auto flat = certify_parametrix_time_derivative(variable_system::from_constant(heat()), alpha,
                                                         log_uniform_times(1e-2, 1.0, 8), grid_spec(1, 12.0, 256), xs,
                                                         opt);
    CHECK(flat.pass);
    CHECK(flat.fitted_C == 0.0);
    const auto r = certify_parametrix_time_derivative(variable_heat(), alpha, log_uniform_times(1e-3, 1.0, 10),
                                                      grid_spec(1, 12.0, 256), xs, opt);
    CAPTURE(r.sup_ratio);
    CHECK(r.pass);
    CHECK(r.bcase.form.t_power == doctest::Approx(-0.75));
}
