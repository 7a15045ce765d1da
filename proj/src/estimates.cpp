#include "fracpar/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fracpar/error.hpp"
#include "fracpar/matrix_tools.hpp"
#include "fracpar/parallel.hpp"

namespace fracpar {

scaling_quantities scaling(double alpha, int b, double t, double x_norm) {
    fractional_order a(alpha);
    if (!(t > 0.0)) throw precondition_error("scaling: t must be positive");
    if (b < 1) throw precondition_error("scaling: b must be positive");
    scaling_quantities s;
    s.R = std::pow(t, -alpha) * std::pow(std::abs(x_norm), 2.0 * b);
    s.rho = std::pow(s.R, 1.0 / (2.0 * b - alpha));
    return s;
}

const char* to_string(regime r) {
    switch (r) {
        case regime::far: return "R>=1";
        case regime::near: return "R<=1";
        case regime::unified: return "all R";
    }
    return "?";
}

double bound_form::algebraic(double t, double x_norm, double R) const {
    double g = std::pow(t, t_power);
    if (x_power != 0.0) g *= std::pow(x_norm, x_power);
    if (log_factor) g *= std::abs(std::log(R)) + 1.0;
    return g;
}

namespace {

std::string shape_text(const bound_form& f) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "t^%.6g|x|^%.6g%s%s", f.t_power, f.x_power, f.log_factor ? "[|log R|+1]" : "",
                  f.exponential ? "exp(-sigma rho)" : "");
    return buf;
}

}  // namespace

bound_case select_case(field_kind kind, int n, int b, int order, regime reg, double alpha) {
    fractional_order a(alpha);
    if (n < 1 || b < 1 || order < 0) throw precondition_error("select_case: invalid dimensions");
    if (kind != field_kind::Z_alpha && kind != field_kind::Y_alpha && kind != field_kind::dtZ_alpha)
        throw precondition_error(std::string("select_case: no estimate for ") + to_string(kind));
    bound_case c;
    c.kind = kind;
    c.n = n;
    c.b = b;
    c.order = order;
    c.reg = reg;
    const double tz = -alpha * (n + order) / (2.0 * b);
    const int q = n + order - 2 * b;  // sign selects sub-, super- or critical behavior
    bound_form& f = c.form;
    if (kind == field_kind::dtZ_alpha) {
        if (order != 0) throw precondition_error("select_case: time-derivative estimates exist for beta = 0 only");
        const int qn = n - 2 * b;
        switch (reg) {
            case regime::far: f = {-alpha * n / (2.0 * b) - 1.0, 0.0, false, true}; break;
            case regime::near:
                if (qn < 0)
                    f = {-alpha * n / (2.0 * b) - 1.0, 0.0, false, false};
                else if (qn > 0)
                    f = {-alpha - 1.0, static_cast<double>(-n + 2 * b), false, false};
                else
                    f = {-alpha - 1.0, 0.0, true, false};
                break;
            case regime::unified:
                throw precondition_error("select_case: no unified estimate for the time derivative");
        }
    } else {
        const bool y = kind == field_kind::Y_alpha;
        switch (reg) {
            case regime::far: f = {y ? tz + alpha - 1.0 : tz, 0.0, false, true}; break;
            case regime::near:
                if (q < 0)
                    f = {y ? tz + alpha - 1.0 : tz, 0.0, false, false};
                else if (q > 0)
                    f = {y ? -1.0 : -alpha, static_cast<double>(-n + 2 * b - order), false, false};
                else if (y)
                    f = {-1.0, 0.0, false, false};
                else
                    f = {-alpha, 0.0, n >= 2, false};
                break;
            case regime::unified:
                if (y) {
                    if (q < 0)
                        f = {tz + alpha - 1.0, 0.0, false, true};
                    else
                        f = {-1.0, static_cast<double>(-n + 2 * b - order), false, true};
                } else if (q < 0) {
                    f = {tz, 0.0, false, true};
                } else if (q > 0) {
                    f = {-alpha, static_cast<double>(-n + 2 * b - order), false, true};
                } else {
                    f = {-alpha, 0.0, true, true};
                }
                break;
        }
    }
    c.label = std::string(to_string(kind)) + " |beta|=" + std::to_string(order) + " " + to_string(reg) + " " +
              shape_text(f);
    return c;
}

std::vector<bound_case> applicable_cases(field_kind kind, int n, int b, int order, double alpha) {
    std::vector<bound_case> out;
    for (regime r : {regime::far, regime::near, regime::unified}) {
        try {
            out.push_back(select_case(kind, n, b, order, r, alpha));
        } catch (const precondition_error&) {
        }
    }
    return out;
}

nlohmann::json estimate_report::to_json() const {
    nlohmann::json j;
    j["case"] = bcase.label;
    j["kind"] = to_string(bcase.kind);
    j["n"] = bcase.n;
    j["b"] = bcase.b;
    j["order"] = bcase.order;
    j["regime"] = to_string(bcase.reg);
    j["form"] = {{"t_power", bcase.form.t_power},
                 {"x_power", bcase.form.x_power},
                 {"log_factor", bcase.form.log_factor},
                 {"exponential", bcase.form.exponential}};
    j["fitted_C"] = fitted_C;
    j["fitted_sigma"] = fitted_sigma;
    j["sup_ratio"] = sup_ratio;
    j["sample_count"] = sample_count;
    j["pass"] = pass;
    if (!note.empty()) j["note"] = note;
    return j;
}

std::vector<bound_sample> samples_from_field(const kernel_field& f) {
    std::vector<bound_sample> out;
    const std::size_t P = f.grid.size();
    out.reserve(P * f.times.size());
    for (std::size_t ti = 0; ti < f.times.size(); ++ti)
        for (std::size_t p = 0; p < P; ++p) {
            if (!f.singular.empty() && f.singular[f.index(ti, p)]) continue;
            double r2 = 0.0;
            for (double c : f.grid.point(p)) r2 += c * c;
            out.push_back({f.times[ti], std::sqrt(r2), norm2(f.at(ti, p))});
        }
    return out;
}

namespace {

struct prepared {
    std::vector<double> lv;   // log value - log algebraic factor
    std::vector<double> rho;
    std::vector<std::size_t> fit, val;
    bool any_far = false;
};

}  // namespace

estimate_report certify_bound(const std::vector<bound_sample>& samples, const bound_case& c,
                              const certify_options& opt) {
    fractional_order a(opt.alpha);
    if (!(opt.allowance >= 1.0) || !(opt.fit_fraction > 0.0 && opt.fit_fraction < 1.0) ||
        !(opt.time_tail_fraction > 0.0 && opt.time_tail_fraction < 1.0))
        throw precondition_error("certify_bound: allowance must be >= 1 and split fractions in (0,1)");
    estimate_report rep;
    rep.bcase = c;
    double vmax = 0.0;
    for (const auto& s : samples)
        if (std::isfinite(s.value)) vmax = std::max(vmax, std::abs(s.value));
    if (vmax <= opt.zero_floor) {
        rep.pass = true;
        rep.sample_count = samples.size();
        rep.note = "field identically zero";
        return rep;
    }
    const double floor = opt.noise_rel * vmax;
    struct item {
        double t, x, v, R, rho;
    };
    std::vector<item> items;
    for (const auto& s : samples) {
        if (!std::isfinite(s.value) || !(s.t > 0.0)) continue;
        const double v = std::abs(s.value);
        if (v <= floor || v == 0.0) continue;
        if (s.x == 0.0 && c.form.singular_at_origin()) continue;
        const auto sc = scaling(opt.alpha, c.b, s.t, s.x);
        if (c.reg == regime::far && sc.R < 1.0) continue;
        if (c.reg == regime::near && sc.R > 1.0) continue;
        items.push_back({s.t, s.x, v, sc.R, sc.rho});
    }
    rep.sample_count = items.size();
    if (items.size() < opt.min_samples)
        throw insufficient_data("certify_bound: " + std::to_string(items.size()) + " admissible samples for '" +
                                c.label + "', need " + std::to_string(opt.min_samples));
    prepared pr;
    const std::size_t m = items.size();
    pr.lv.resize(m);
    pr.rho.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        pr.lv[i] = std::log(items[i].v) - std::log(c.form.algebraic(items[i].t, items[i].x, items[i].R));
        pr.rho[i] = items[i].rho;
        if (items[i].R > 1.0) pr.any_far = true;
    }
    const bool fit_sigma = c.form.exponential && pr.any_far;
    // Validation: the smallest-t tail always, plus the large-rho share when sigma is fitted.
    std::vector<std::size_t> by_t(m);
    std::iota(by_t.begin(), by_t.end(), 0);
    std::stable_sort(by_t.begin(), by_t.end(), [&](std::size_t i, std::size_t j) {
        if (items[i].t != items[j].t) return items[i].t < items[j].t;
        return items[i].x < items[j].x;
    });
    std::vector<unsigned char> validate(m, 0);
    const std::size_t ntail = std::min(m - 1, static_cast<std::size_t>(std::floor(opt.time_tail_fraction * m)));
    for (std::size_t k = 0; k < ntail; ++k) validate[by_t[k]] = 1;
    if (fit_sigma) {
        std::vector<std::size_t> by_rho(m);
        std::iota(by_rho.begin(), by_rho.end(), 0);
        std::stable_sort(by_rho.begin(), by_rho.end(), [&](std::size_t i, std::size_t j) {
            if (items[i].rho != items[j].rho) return items[i].rho < items[j].rho;
            if (items[i].t != items[j].t) return items[i].t > items[j].t;
            return items[i].x < items[j].x;
        });
        const std::size_t nlow = static_cast<std::size_t>(std::ceil(opt.fit_fraction * m));
        for (std::size_t k = nlow; k < m; ++k) validate[by_rho[k]] = 1;
    }
    for (std::size_t i = 0; i < m; ++i) (validate[i] ? pr.val : pr.fit).push_back(i);
    if (pr.fit.empty()) throw insufficient_data("certify_bound: empty fit split for '" + c.label + "'");

    auto sup_over = [&](const std::vector<std::size_t>& idx, double sigma) {
        double s = -INFINITY;
        for (std::size_t i : idx) s = std::max(s, pr.lv[i] + sigma * pr.rho[i]);
        return s;
    };
    const double slack = std::log(opt.allowance);
    auto admissible = [&](double sigma) { return pr.val.empty() || sup_over(pr.val, sigma) <= sup_over(pr.fit, sigma) + slack; };

    double sigma = 0.0;
    if (fit_sigma) {
        if (!admissible(0.0)) {
            rep.note = "algebraic shape does not extrapolate";
        } else if (admissible(opt.sigma_max)) {
            sigma = opt.sigma_max;
        } else {
            double lo = 0.0, hi = opt.sigma_max;
            while (hi - lo > opt.sigma_tol) {
                const double mid = 0.5 * (lo + hi);
                (admissible(mid) ? lo : hi) = mid;
            }
            sigma = lo;
        }
    } else if (c.form.exponential) {
        rep.note = "no samples with R > 1: exponential factor not identifiable";
    }
    rep.fitted_sigma = sigma;
    rep.fitted_C = opt.allowance * std::exp(sup_over(pr.fit, sigma));
    double worst = -INFINITY;
    for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, pr.lv[i] + sigma * pr.rho[i]);
    rep.sup_ratio = std::exp(worst) / rep.fitted_C;
    rep.pass = rep.sup_ratio <= 1.0;
    return rep;
}

estimate_report certify_bound(const kernel_field& f, const bound_case& c, const certify_options& opt) {
    if (f.kind != c.kind) throw precondition_error("certify_bound: field kind differs from the case kind");
    if (f.derivative.order() != c.order) throw precondition_error("certify_bound: derivative order differs");
    return certify_bound(samples_from_field(f), c, opt);
}

double evaluate_ratio(const estimate_report& r, const std::vector<bound_sample>& samples, double alpha) {
    double worst = 0.0;
    for (const auto& s : samples) {
        if (!std::isfinite(s.value)) continue;
        if (s.x == 0.0 && r.bcase.form.singular_at_origin()) continue;
        const auto sc = scaling(alpha, r.bcase.b, s.t, s.x);
        if (r.bcase.reg == regime::far && sc.R < 1.0) continue;
        if (r.bcase.reg == regime::near && sc.R > 1.0) continue;
        double bound = r.fitted_C * r.bcase.form.algebraic(s.t, s.x, sc.R);
        if (r.bcase.form.exponential) bound *= std::exp(-r.fitted_sigma * sc.rho);
        if (bound > 0.0) worst = std::max(worst, std::abs(s.value) / bound);
    }
    return worst;
}

std::vector<double> log_uniform_times(double t_min, double t_max, int count) {
    if (!(t_min > 0.0 && t_max >= t_min) || count < 1) throw precondition_error("log_uniform_times: bad range");
    std::vector<double> t(count);
    for (int i = 0; i < count; ++i)
        t[i] = count == 1 ? t_min : t_min * std::pow(t_max / t_min, static_cast<double>(i) / (count - 1));
    return t;
}

namespace {

multi_index axis_derivative(int n, int order) {
    std::vector<int> c(n, 0);
    c[0] = order;
    return multi_index(c);
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

std::vector<bound_sample> difference_samples(const variable_system& sys, double alpha, const point_pairs& pairs,
                                             field_kind kind, int order, const difference_options& dopt) {
    sys.validate();
    if (pairs.empty()) throw precondition_error("difference bound: no point pairs");
    const multi_index beta = axis_derivative(sys.n, order);
    std::vector<bound_sample> samples;
    for (const auto& [y1, y2] : pairs) {
        const double d = distance(y1, y2);
        if (!(d > 0.0)) throw precondition_error("difference bound: coincident pair");
        const double scale = 1.0 / std::pow(d, sys.holder_exponent);
        const auto f1 = fractional_kernel(freeze(sys, y1), alpha, kind, dopt.times, dopt.grid, dopt.route, beta);
        const auto f2 = fractional_kernel(freeze(sys, y2), alpha, kind, dopt.times, dopt.grid, dopt.route, beta);
        kernel_field diff = f1;
        for (std::size_t i = 0; i < diff.values.size(); ++i) {
            diff.values[i] = (f1.values[i] - f2.values[i]) * scale;
            diff.singular[i] = f1.singular[i] | f2.singular[i];
        }
        const auto s = samples_from_field(diff);
        samples.insert(samples.end(), s.begin(), s.end());
    }
    return samples;
}

estimate_report certify_difference_bound(const variable_system& sys, double alpha, const point_pairs& pairs,
                                         const bound_case& c, const difference_options& dopt,
                                         const certify_options& opt) {
    bound_case dc = c;
    dc.label = "difference/|y'-y''|^gamma: " + c.label;
    return certify_bound(difference_samples(sys, alpha, pairs, c.kind, c.order, dopt), dc, opt);
}

estimate_report certify_parametrix_time_derivative(const variable_system& sys, double alpha,
                                                   const std::vector<double>& times,
                                                   const grid_spec& xi_grid,
                                                   const std::vector<double>& x_points,
                                                   const certify_options& opt) {
    sys.validate();
    xi_grid.validate();
    if (sys.n != 1 || xi_grid.n != 1) throw precondition_error("parametrix time-derivative check is one-dimensional");
    if (times.empty() || x_points.empty()) throw precondition_error("parametrix time-derivative check: empty sample");
    const int b = sys.b;
    const double tmin = *std::min_element(times.begin(), times.end());
    double dmax = 0.0;
    for (double x : x_points) dmax = std::max({dmax, std::abs(x + xi_grid.half_width), std::abs(x - xi_grid.half_width)});
    const double ymax = std::pow(tmin, -alpha / (2.0 * b)) * dmax;
    const std::size_t M = xi_grid.size(), T = times.size(), X = x_points.size();
    const double h = xi_grid.spacing();
    // The kernel frozen at x itself has zero mass, so it is subtracted from the integrand:
    // the difference carries no cusp at xi = x and the trapezoid sum stays accurate for small t.
    std::vector<double> scaled_pts(M * T * X);
    for (std::size_t j = 0; j < M; ++j)
        for (std::size_t k = 0; k < T * X; ++k)
            scaled_pts[j * T * X + k] =
                std::pow(times[k / X], -alpha / (2.0 * b)) * (x_points[k % X] - xi_grid.coordinate(static_cast<int>(j)));
    auto evaluate = [&](const constant_operator& op, std::size_t j, std::vector<cmatrix>& out) {
        const auto prof = make_fourier_profile(op, alpha, field_kind::dtZ_alpha, multi_index({0}), ymax);
        std::vector<std::vector<double>> ys(T * X);
        for (std::size_t k = 0; k < T * X; ++k) ys[k] = {scaled_pts[j * T * X + k]};
        std::vector<unsigned char> sg;
        prof->evaluate(ys, out, sg);
        for (std::size_t k = 0; k < T * X; ++k)
            if (sg[k]) out[k].setZero();
    };
    std::vector<std::vector<cmatrix>> contrib(M);
    parallel_for(M, [&](std::size_t j) {
        evaluate(freeze(sys, {xi_grid.coordinate(static_cast<int>(j))}), j, contrib[j]);
    });
    std::vector<std::vector<cmatrix>> own(X);
    parallel_for(X, [&](std::size_t i) {
        const auto prof = make_fourier_profile(freeze(sys, {x_points[i]}), alpha, field_kind::dtZ_alpha,
                                               multi_index({0}), ymax);
        std::vector<std::vector<double>> ys;
        for (std::size_t j = 0; j < M; ++j)
            for (std::size_t ti = 0; ti < T; ++ti) ys.push_back({scaled_pts[j * T * X + ti * X + i]});
        std::vector<unsigned char> sg;
        prof->evaluate(ys, own[i], sg);
        for (std::size_t q = 0; q < ys.size(); ++q)
            if (sg[q]) own[i][q].setZero();
    });
    std::vector<bound_sample> samples;
    for (std::size_t k = 0; k < T * X; ++k) {
        const std::size_t ti = k / X, i = k % X;
        cmatrix acc = cmatrix::Zero(sys.N, sys.N);
        for (std::size_t j = 0; j < M; ++j) acc += contrib[j][k] - own[i][j * T + ti];
        acc *= std::pow(times[ti], kind_time_exponent(field_kind::dtZ_alpha, alpha, 1, b, 0)) * h;
        samples.push_back({times[ti], std::abs(x_points[i]), norm2(acc)});
    }
    bound_case c;
    c.kind = field_kind::dtZ_alpha;
    c.n = 1;
    c.b = b;
    c.reg = regime::unified;
    c.form = {-1.0 + alpha * sys.holder_exponent / (2.0 * b), 0.0, false, false};
    c.label = "integral over xi of dt Z0(t, x - xi; xi): " + shape_text(c.form);
    return certify_bound(samples, c, opt);
}

}  // namespace fracpar
