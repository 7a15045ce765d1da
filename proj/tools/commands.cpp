#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "fracpar/digest.hpp"
#include "fracpar/error.hpp"
#include "fracpar/estimates.hpp"
#include "fracpar/expr.hpp"
#include "fracpar/kernel_io.hpp"
#include "fracpar/levi.hpp"
#include "fracpar/oracle.hpp"
#include "fracpar/specfun.hpp"
#include "fracpar/system_io.hpp"

namespace fracpar::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

/// Merges `patch` into `base` recursively (objects merge, everything else replaces).
void merge(json& base, const json& patch) {
    if (!patch.is_object()) return;
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
            merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

struct context {
    json config;
    std::string digest;
    fs::path config_dir;
    fs::path output;
    std::uint64_t seed = 0;

    double alpha() const {
        const double a = config.value("alpha", 0.5);
        fractional_order check(a);
        return a;
    }
    const json& section(const char* name) const {
        static const json empty = json::object();
        return config.contains(name) ? config.at(name) : empty;
    }
    double tolerance(const char* name, double fallback) const {
        double v = fallback;
        if (config.contains("tolerances") && config["tolerances"].contains(name)) v = config["tolerances"][name].get<double>();
        if (!(v > 0.0)) throw config_error(std::string("tolerance ") + name + " must be positive");
        return v;
    }
    fs::path artifact(const std::string& name) const { return output / name; }
};

system_spec load_config_system(const context& c) {
    if (!c.config.contains("system")) throw config_error("config: missing \"system\"");
    const json& s = c.config["system"];
    if (s.is_string()) {
        fs::path p = s.get<std::string>();
        if (p.is_relative()) p = c.config_dir / p;
        if (!fs::exists(p)) throw config_error("config: system file not found: " + p.string());
        return load_system(p.string());
    }
    return parse_system(s);
}

grid_spec parse_grid(const json& g, int n, const grid_spec& fallback) {
    if (g.is_null()) return fallback;
    grid_spec out(g.value("n", n), g.value("half_width", fallback.half_width), g.value("points", fallback.points_per_axis));
    out.validate();
    if (out.n != n) throw config_error("config: grid dimension differs from the system dimension");
    return out;
}

std::vector<double> parse_times(const json& t, const std::vector<double>& fallback) {
    if (t.is_null()) return fallback;
    std::vector<double> out;
    if (t.is_object() && t.contains("log_uniform")) {
        const auto& l = t["log_uniform"];
        if (!l.is_array() || l.size() != 3) throw config_error("config: log_uniform needs [t_min, t_max, count]");
        out = log_uniform_times(l[0].get<double>(), l[1].get<double>(), l[2].get<int>());
    } else {
        out = t.get<std::vector<double>>();
    }
    if (out.empty()) throw config_error("config: empty time list");
    for (double v : out)
        if (!(v > 0.0)) throw config_error("config: times must be positive");
    return out;
}

/// An N-vector field from one expression (repeated) or a list of N expressions; null means zero.
std::function<cvector(const std::vector<double>&)> vector_field(const json& j, int N) {
    std::vector<expression> parts;
    if (j.is_null()) return [N](const std::vector<double>&) { return cvector::Zero(N); };
    auto text = [](const json& e) { return e.is_string() ? e.get<std::string>() : format_number(e.get<double>()); };
    if (j.is_array()) {
        if (static_cast<int>(j.size()) != N) throw config_error("config: field needs one expression per component");
        for (const auto& e : j) parts.emplace_back(text(e));
    } else {
        for (int r = 0; r < N; ++r) parts.emplace_back(text(j));
    }
    return [parts, N](const std::vector<double>& x) {
        cvector v(N);
        for (int r = 0; r < N; ++r) v(r) = parts[r](x);
        return v;
    };
}

/// f(t, x): expressions may use t through the coordinate list (t appended after x).
field_source_fn source_field(const json& j, int N, int n) {
    if (j.is_null()) return {};
    std::vector<expression> parts;
    auto text = [](const json& e) { return e.is_string() ? e.get<std::string>() : format_number(e.get<double>()); };
    if (j.is_array()) {
        if (static_cast<int>(j.size()) != N) throw config_error("config: source needs one expression per component");
        for (const auto& e : j) parts.emplace_back(text(e));
    } else {
        for (int r = 0; r < N; ++r) parts.emplace_back(text(j));
    }
    // The source time is exposed as the coordinate after the spatial ones (x2 in one dimension).
    return [parts, N, n](double t, const std::vector<double>& x) {
        std::vector<double> xt(x.begin(), x.begin() + n);
        xt.push_back(t);
        cvector v(N);
        for (int r = 0; r < N; ++r) v(r) = parts[r](xt);
        return v;
    };
}

std::string comment_line(const char* what, const context& c) {
    return std::string("# fracpar ") + what + " digest=" + c.digest + "\n";
}

void write_json(const fs::path& p, const json& j) { write_atomic(p, j.dump(2) + "\n"); }

std::string trajectory_csv(const trajectory& tr, const context& c) {
    std::string s = comment_line("trajectory", c);
    s += "t,x1,i,re,im\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        for (std::size_t p = 0; p < tr.grid.size(); ++p) {
            const std::string prefix = format_number(tr.times[k]) + "," + format_number(tr.grid.point(p)[0]) + ",";
            for (int r = 0; r < tr.N; ++r)
                s += prefix + std::to_string(r) + "," + format_number(tr.values[k](r, p).real()) + "," +
                     format_number(tr.values[k](r, p).imag()) + "\n";
        }
    return s;
}

json trajectory_header(const trajectory& tr, const context& c, const char* source) {
    return {{"format", "fracpar.trajectory.v1"},
            {"source", source},
            {"N", tr.N},
            {"alpha", tr.alpha},
            {"dt", tr.dt},
            {"grid", {{"n", tr.grid.n}, {"half_width", tr.grid.half_width}, {"points_per_axis", tr.grid.points_per_axis}}},
            {"columns", "t,x1,i,re,im"},
            {"config_digest", c.digest}};
}

// ---------------------------------------------------------------- specfun-eval

cplx parse_complex(const json& z) {
    if (z.is_array()) return {z.at(0).get<double>(), z.at(1).get<double>()};
    return {z.get<double>(), 0.0};
}

specfun::ml_family parse_family(const std::string& s) {
    if (s == "one") return specfun::ml_family::one;
    if (s == "alpha") return specfun::ml_family::alpha;
    if (s == "zero") return specfun::ml_family::zero;
    throw config_error("config: unknown Mittag-Leffler family " + s);
}

int cmd_specfun(const context& c) {
    const json& s = c.section("specfun");
    std::vector<double> alphas = s.value("alphas", std::vector<double>{c.alpha()});
    for (double a : alphas) fractional_order check(a);
    std::string csv = comment_line("specfun", c);
    csv += "function,alpha,t,arg_re,arg_im,re,im\n";
    const std::string nan = format_number(std::nan(""));
    auto row = [&](const std::string& fn, double a, double t, cplx arg, cplx v) {
        csv += fn + "," + format_number(a) + "," + (std::isnan(t) ? nan : format_number(t)) + "," + format_number(arg.real()) +
               "," + format_number(arg.imag()) + "," + format_number(v.real()) + "," + format_number(v.imag()) + "\n";
    };
    std::size_t rows = 0;
    for (double a : alphas) {
        for (double z : s.value("wright_z", std::vector<double>{0.0, 0.5, 1.0, 2.0, 5.0})) {
            row("wright_phi", a, std::nan(""), z, specfun::wright_phi(a, z));
            ++rows;
        }
        const json sub = s.value("subordination", json{{"t", 1.0}, {"s", {0.25, 0.5, 1.0, 2.0}}});
        const double t = sub.value("t", 1.0);
        for (double sv : sub.value("s", std::vector<double>{})) {
            row("phi", a, t, sv, specfun::subordination_kernel(specfun::kernel_kind::phi, a, t, sv));
            row("psi", a, t, sv, specfun::subordination_kernel(specfun::kernel_kind::psi, a, t, sv));
            row("nu", a, t, sv, specfun::subordination_kernel(specfun::kernel_kind::nu, a, t, sv));
            rows += 3;
        }
        const json ml = s.value("ml", json{{"z", {-10.0, -1.0, 0.0, 0.5}}, {"families", {"one", "alpha", "zero"}}});
        for (const auto& fam : ml.value("families", std::vector<std::string>{"one"}))
            for (const auto& z : ml.value("z", json::array())) {
                const cplx zz = parse_complex(z);
                row("ml_" + fam, a, std::nan(""), zz, specfun::mittag_leffler_scalar(a, parse_family(fam), zz));
                ++rows;
            }
    }
    write_atomic(c.artifact("specfun.csv"), csv);
    write_json(c.artifact("specfun.json"), {{"format", "fracpar.specfun.v1"},
                                            {"columns", "function,alpha,t,arg_re,arg_im,re,im"},
                                            {"rows", rows},
                                            {"config_digest", c.digest}});
    std::printf("specfun-eval: %zu values -> %s\n", rows, c.artifact("specfun.csv").c_str());
    return ok;
}

// ---------------------------------------------------------------- kernel

field_kind parse_kind(const std::string& s) {
    for (field_kind k : {field_kind::Z, field_kind::Z_alpha, field_kind::Y_alpha, field_kind::dtZ_alpha,
                         field_kind::Y_alpha_int1, field_kind::Y_alpha_int2})
        if (s == to_string(k)) return k;
    throw config_error("config: unknown kernel kind " + s);
}

kernel_route parse_route(const std::string& s) {
    if (s == "fourier") return kernel_route::fourier;
    if (s == "subordination") return kernel_route::subordination;
    throw config_error("config: unknown route " + s);
}

multi_index order_index(int n, int order) {
    std::vector<int> v(n, 0);
    v[0] = order;
    return multi_index(v);
}

int cmd_kernel(const context& c) {
    const auto spec = load_config_system(c);
    const constant_operator& op = spec.require_constant();
    require_parabolic(op);
    const json& s = c.section("kernel");
    const grid_spec g = parse_grid(c.config.value("grid", json()), op.n(), grid_spec(op.n(), 8.0, 256));
    const auto times = parse_times(c.config.value("times", json()), {0.25, 0.5, 1.0});
    const kernel_route route = parse_route(s.value("route", std::string("fourier")));
    json index = json::array();
    for (const auto& kname : s.value("kinds", std::vector<std::string>{"Z_alpha", "Y_alpha"})) {
        const field_kind kind = parse_kind(kname);
        for (int order : s.value("orders", std::vector<int>{0})) {
            const auto f = fractional_kernel(op, c.alpha(), kind, times, g, route, order_index(op.n(), order));
            const std::string stem = "kernel_" + kname + "_d" + std::to_string(order);
            write_field(c.artifact(stem), f, c.digest);
            json row{{"kind", kname}, {"order", order}, {"file", stem + ".csv"}};
            json integrals = json::array();
            if (order == 0)
                for (std::size_t ti = 0; ti < times.size(); ++ti) integrals.push_back(spatial_integral(f, ti)(0, 0).real());
            row["integral_entry_00"] = integrals;
            index.push_back(row);
            std::printf("kernel: %s d%d on %zu points x %zu times\n", kname.c_str(), order, g.size(), times.size());
        }
    }
    write_json(c.artifact("kernel_index.json"),
               {{"route", to_string(route)}, {"alpha", c.alpha()}, {"fields", index}, {"config_digest", c.digest}});
    return ok;
}

// ---------------------------------------------------------------- xcheck

int cmd_xcheck(const context& c) {
    const auto spec = load_config_system(c);
    const constant_operator& op = spec.require_constant();
    require_parabolic(op);
    const json& s = c.section("xcheck");
    const double alpha = c.alpha();
    const grid_spec g = parse_grid(c.config.value("grid", json()), op.n(), grid_spec(op.n(), 12.0, 96));
    const auto times = parse_times(c.config.value("times", json()), {0.2, 1.0});
    const double route_tol = c.tolerance("route", 1e-5);
    json report{{"config_digest", c.digest}, {"alpha", alpha}};
    bool pass = true;
    json routes = json::array();
    for (const auto& kname : s.value("kinds", std::vector<std::string>{"Z_alpha", "Y_alpha"})) {
        const field_kind kind = parse_kind(kname);
        const auto a = fractional_kernel(op, alpha, kind, times, g, kernel_route::subordination);
        const auto b = fractional_kernel(op, alpha, kind, times, g, kernel_route::fourier);
        double worst = 0.0;
        std::size_t used = 0;
        for (std::size_t ti = 0; ti < times.size(); ++ti)
            for (std::size_t p = 0; p < g.size(); ++p) {
                const auto x = g.point(p);
                double r2 = 0.0;
                for (double v : x) r2 += v * v;
                const double R = std::pow(times[ti], -alpha) * std::pow(std::sqrt(r2), 2 * op.b());
                if (R < 0.1 || R > 10.0 || a.singular[ti * g.size() + p] || b.singular[ti * g.size() + p]) continue;
                const double ref = a.at(ti, p).norm();
                if (ref == 0.0) continue;
                worst = std::max(worst, (a.at(ti, p) - b.at(ti, p)).norm() / ref);
                ++used;
            }
        const bool ok_route = used > 0 && worst <= route_tol;
        pass = pass && ok_route;
        routes.push_back({{"kind", kname}, {"samples", used}, {"sup_relative_disagreement", worst},
                          {"tolerance", route_tol}, {"pass", ok_route}});
        std::printf("xcheck: %s routes sup rel. disagreement %.3e on %zu points (R in [0.1, 10]) %s\n", kname.c_str(),
                    worst, used, ok_route ? "PASS" : "FAIL");
    }
    report["routes"] = routes;
    if (s.contains("oracle") && op.n() == 1) {
        // Convolution of Z_alpha with u0 against the time-stepping oracle on a periodic box.
        const json& o = s["oracle"];
        const double T = o.value("T", 0.5), oracle_tol = c.tolerance("oracle", 1e-3);
        const int steps = o.value("steps", 200);
        const grid_spec og(1, o.value("half_width", 8.0), o.value("points", 256));
        const auto u0f = vector_field(o.value("u0", json("exp(-4*x^2)")), op.N());
        const auto u0 = sample_field(og, op.N(), u0f);
        const auto tr = solve_ivp(variable_system::from_constant(op), u0, {}, T, steps, og, alpha);
        const grid_spec dg(1, 2.0 * og.half_width, 2 * og.points_per_axis);
        const auto z = fractional_kernel(op, alpha, field_kind::Z_alpha, {T}, dg, kernel_route::fourier);
        const double h = og.spacing();
        double worst = 0.0;
        for (std::size_t i = 0; i < og.size(); ++i) {
            cvector acc = cvector::Zero(op.N());
            for (std::size_t j = 0; j < og.size(); ++j) acc += h * z.at(0, i + og.size() - j) * u0.col(j);
            worst = std::max(worst, (acc - tr.values.back().col(i)).cwiseAbs().maxCoeff());
        }
        const bool ok_oracle = worst <= oracle_tol;
        pass = pass && ok_oracle;
        report["oracle"] = {{"T", T}, {"steps", steps}, {"sup_error", worst}, {"tolerance", oracle_tol}, {"pass", ok_oracle}};
        std::printf("xcheck: Z_alpha convolution vs oracle at T=%g sup error %.3e %s\n", T, worst,
                    ok_oracle ? "PASS" : "FAIL");
    }
    report["pass"] = pass;
    write_json(c.artifact("xcheck_report.json"), report);
    return pass ? ok : certification_failure;
}

// ---------------------------------------------------------------- certify

std::vector<bound_sample> subsample(std::vector<bound_sample> s, double fraction, std::mt19937_64& rng) {
    if (fraction >= 1.0) return s;
    if (!(fraction > 0.0)) throw config_error("config: sample_fraction must be in (0, 1]");
    std::vector<bound_sample> out;
    for (const auto& v : s)
        if (static_cast<double>(rng() >> 11) * 0x1.0p-53 < fraction) out.push_back(v);
    return out;
}

int cmd_certify(const context& c) {
    const auto spec = load_config_system(c);
    const variable_system& sys = spec.system;
    const double alpha = c.alpha();
    const json& s = c.section("certify");
    certify_options opt;
    opt.alpha = alpha;
    opt.min_samples = s.value("min_samples", opt.min_samples);
    const double fraction = s.value("sample_fraction", 1.0);
    std::mt19937_64 rng(c.seed);
    // Parabolicity is a precondition of every case set.
    for (double y : {-1.0, 0.0, 1.0}) require_parabolic(freeze(sys, std::vector<double>(sys.n, y)));
    const grid_spec g = parse_grid(c.config.value("grid", json()), sys.n, grid_spec(sys.n, 8.0, 512));
    const auto times = parse_times(c.config.value("times", json()), log_uniform_times(1e-2, 1.0, 10));
    json rows = json::array();
    bool pass = true;
    auto record = [&](const estimate_report& r, const std::string& set) {
        json j = r.to_json();
        j["case_set"] = set;
        rows.push_back(j);
        pass = pass && r.pass;
        std::printf("certify[%s] %-62s C=%.3e sigma=%.3f ratio=%.3f %s\n", set.c_str(), r.bcase.label.c_str(), r.fitted_C,
                    r.fitted_sigma, r.sup_ratio, r.pass ? "PASS" : "FAIL");
    };
    for (const auto& set : s.value("case_sets", std::vector<std::string>{"kernels"})) {
        if (set == "kernels") {
            const constant_operator& op = spec.require_constant();
            for (field_kind kind : {field_kind::Z_alpha, field_kind::Y_alpha, field_kind::dtZ_alpha}) {
                const int kmax = kind == field_kind::dtZ_alpha ? 0 : 2 * op.b();
                for (int k = 0; k <= kmax; ++k) {
                    const auto f = fractional_kernel(op, alpha, kind, times, g, kernel_route::fourier, order_index(op.n(), k));
                    const auto samples = subsample(samples_from_field(f), fraction, rng);
                    for (const auto& bc : applicable_cases(kind, op.n(), op.b(), k, alpha)) record(certify_bound(samples, bc, opt), set);
                }
            }
        } else if (set == "difference") {
            point_pairs pairs;
            for (const auto& p : s.value("pairs", json::array({json::array({0.0, 0.3}), json::array({1.0, 2.0})})))
                pairs.push_back({std::vector<double>(sys.n, p.at(0).get<double>()), std::vector<double>(sys.n, p.at(1).get<double>())});
            difference_options d;
            d.times = times;
            d.grid = grid_spec(sys.n, g.half_width, std::min(g.points_per_axis, 256));
            for (int k = 0; k <= 2 * sys.b; ++k)
                for (field_kind kind : {field_kind::Z_alpha, field_kind::Y_alpha}) {
                    const auto samples = subsample(difference_samples(sys, alpha, pairs, kind, k, d), fraction, rng);
                    for (const auto& bc : applicable_cases(kind, sys.n, sys.b, k, alpha)) record(certify_bound(samples, bc, opt), set);
                }
        } else if (set == "parametrix") {
            std::vector<double> xs = s.value("x_points", std::vector<double>{-2.25, -1.5, -0.75, 0.0, 0.75, 1.5, 2.25});
            certify_options po = opt;
            po.min_samples = s.value("parametrix_min_samples", std::size_t{50});
            const auto pt = parse_times(s.value("parametrix_times", json()), log_uniform_times(1e-3, 1.0, 10));
            record(certify_parametrix_time_derivative(sys, alpha, pt, grid_spec(1, 12.0, 256), xs, po), set);
        } else {
            throw config_error("config: unknown case set " + set);
        }
    }
    write_json(c.artifact("certify_report.json"), {{"config_digest", c.digest}, {"alpha", alpha}, {"seed", c.seed},
                                                   {"reports", rows}, {"pass", pass}});
    return pass ? ok : certification_failure;
}

// ---------------------------------------------------------------- levi

levi_discretization levi_disc(const context& c, const json& s) {
    levi_discretization d;
    d.alpha = c.alpha();
    d.grid = parse_grid(c.config.value("grid", json()), 1, d.grid);
    d.T = s.value("T", d.T);
    d.steps = s.value("steps", d.steps);
    d.validate();
    return d;
}

int cmd_levi(const context& c) {
    const auto spec = load_config_system(c);
    const variable_system& sys = spec.system;
    const json& s = c.section("levi");
    const auto disc = levi_disc(c, s);
    for (std::size_t j = 0; j < disc.grid.size(); j += 8) require_parabolic(freeze(sys, disc.grid.point(j)));
    volterra_options vo;
    vo.tol = c.tolerance("volterra", vo.tol);
    vo.max_sweeps = s.value("max_sweeps", vo.max_sweeps);

    const parametrix_provider p(sys, disc);
    const auto Q = solve_volterra(density_kind::Q, p, vo);
    const auto Phi = solve_volterra(density_kind::Phi, p, vo);
    const auto g = green_assemble(p, Q, Phi);
    json report{{"config_digest", c.digest}, {"alpha", disc.alpha}, {"T", disc.T}, {"steps", disc.steps},
                {"grid", {{"half_width", disc.grid.half_width}, {"points", disc.grid.points_per_axis}}},
                {"truncation_bound", p.truncation_bound()}};
    for (const auto* d : {&Q, &Phi})
        report["densities"][to_string(d->kind)] = {{"iterations", d->iteration_count}, {"residual", d->residual},
                                                   {"tol", d->tol}, {"sup", d->field.sup_norm()}, {"updates", d->updates}};
    std::printf("levi: Q %d sweeps (residual %.2e), Phi %d sweeps (residual %.2e), truncation bound %.2e\n",
                Q.iteration_count, Q.residual, Phi.iteration_count, Phi.residual, p.truncation_bound());
    bool pass = true;

    const auto u0 = sample_field(disc.grid, sys.N, vector_field(s.value("u0", json("exp(-x^2)")), sys.N));
    const auto f = source_field(s.value("f", json()), sys.N, 1);
    const auto u = cauchy_solve(p, g, u0, f);
    write_atomic(c.artifact("levi_solution.csv"), trajectory_csv(u, c));
    write_json(c.artifact("levi_solution.json"), trajectory_header(u, c, "levi"));

    if (s.value("certify", true) && sys.n < 2 * sys.b) {
        certify_options co;
        co.alpha = disc.alpha;
        for (bool is_z : {true, false}) {
            const auto r = certify_remainder(is_z ? g.V_Z : g.V_Y, is_z, sys, co);
            report["remainders"][is_z ? "V_Z" : "V_Y"] = r.to_json();
            pass = pass && r.pass;
            std::printf("levi: %s ratio %.3f sigma %.3f %s\n", r.bcase.label.c_str(), r.sup_ratio, r.fitted_sigma,
                        r.pass ? "PASS" : "FAIL");
        }
    }
    if (s.contains("oracle")) {
        const json& o = s["oracle"];
        const int refine = o.value("refine", 4), steps = o.value("steps", 400);
        const double tol = c.tolerance("oracle", 1e-2);
        const grid_spec og(1, disc.grid.half_width, refine * disc.grid.points_per_axis);
        const auto ou0 = sample_field(og, sys.N, vector_field(s.value("u0", json("exp(-x^2)")), sys.N));
        const auto ref = solve_ivp(sys, ou0, f, disc.T, steps, og, disc.alpha);
        json rows = json::array();
        for (double t : o.value("times", std::vector<double>{0.25, 0.5, 1.0})) {
            const long k = std::lround(t / disc.dt()), ko = std::lround(t / ref.dt);
            if (k < 1 || k > disc.steps || std::abs(k * disc.dt() - t) > 1e-12 || std::abs(ko * ref.dt - t) > 1e-12)
                throw config_error("config: oracle comparison times must be nodes of both time grids");
            double err = 0.0;
            for (std::size_t i = 0; i < disc.grid.size(); ++i)
                err = std::max(err, (u.values[k].col(i) - ref.values[ko].col(refine * i)).cwiseAbs().maxCoeff());
            rows.push_back({{"t", t}, {"sup_error", err}, {"tolerance", tol}, {"pass", err <= tol}});
            pass = pass && err <= tol;
            std::printf("levi: Cauchy solution vs oracle at t=%g sup error %.3e %s\n", t, err, err <= tol ? "PASS" : "FAIL");
        }
        report["oracle"] = rows;
    }
    if (s.value("post_hoc", false)) {
        // Diagnostics on the doubled time grid; reported, not part of the exit status.
        levi_discretization fine_disc = disc;
        fine_disc.steps *= 2;
        const parametrix_provider fine(sys, fine_disc);
        for (const auto* d : {&Q, &Phi}) {
            const double shifted = shifted_grid_residual(fine, *d);
            const double doubling = time_doubling_change(*d, solve_volterra(d->kind, fine, vo));
            report["post_hoc"][to_string(d->kind)] = {{"shifted_grid_residual", shifted},
                                                      {"time_doubling_change", doubling},
                                                      {"within_3_tol", shifted <= 3.0 * d->tol},
                                                      {"within_2_tol", doubling < 2.0 * d->tol}};
            std::printf("levi: %s shifted-grid residual %.3e, time-doubling change %.3e (tol %.1e)\n", to_string(d->kind),
                        shifted, doubling, d->tol);
        }
    }
    if (s.value("export_fields", false)) {
        const std::pair<const char*, const levi_field*> fields[] = {
            {"Q", &Q.field}, {"Phi", &Phi.field}, {"V_Z", &g.V_Z}, {"V_Y", &g.V_Y}, {"Z1", &g.Z1}, {"Y1", &g.Y1}};
        for (const auto& [name, fld] : fields) {
            write_atomic(c.artifact(std::string("levi_") + name + ".csv"), levi_field_csv(*fld, name, c.digest));
            write_json(c.artifact(std::string("levi_") + name + ".json"), levi_field_header(*fld, name, c.digest));
        }
    }
    report["pass"] = pass;
    write_json(c.artifact("levi_report.json"), report);
    return pass ? ok : certification_failure;
}

// ---------------------------------------------------------------- solve

int cmd_solve(const context& c) {
    const auto spec = load_config_system(c);
    const variable_system& sys = spec.system;
    if (sys.n != 1) throw config_error("solve: the oracle runs in one dimension");
    const json& s = c.section("solve");
    const grid_spec g = parse_grid(c.config.value("grid", json()), 1, grid_spec(1, 8.0, 256));
    for (std::size_t j = 0; j < g.size(); j += 16) require_parabolic(freeze(sys, g.point(j)));
    const auto u0 = sample_field(g, sys.N, vector_field(s.value("u0", json("exp(-x^2)")), sys.N));
    const auto f = source_field(s.value("f", json()), sys.N, 1);
    const auto tr = solve_ivp(sys, u0, f, s.value("T", 1.0), s.value("steps", 200), g, c.alpha(), s.value("corrected", true));
    write_atomic(c.artifact("solve_trajectory.csv"), trajectory_csv(tr, c));
    write_json(c.artifact("solve_trajectory.json"), trajectory_header(tr, c, "oracle"));
    double sup = 0.0;
    for (const auto& v : tr.values) sup = std::max(sup, v.cwiseAbs().maxCoeff());
    std::printf("solve: %zu steps on %zu points, sup |u| = %.6g\n", tr.times.size() - 1, g.size(), sup);
    return ok;
}

const std::map<std::string, std::function<int(const context&)>>& commands() {
    static const std::map<std::string, std::function<int(const context&)>> m{
        {"specfun-eval", cmd_specfun}, {"kernel", cmd_kernel}, {"xcheck", cmd_xcheck},
        {"certify", cmd_certify},      {"levi", cmd_levi},     {"solve", cmd_solve}};
    return m;
}

}  // namespace

json quick_profile(const std::string& command) {
    if (command == "kernel") return {{"grid", {{"half_width", 8.0}, {"points", 256}}}, {"times", {0.25, 0.5, 1.0}}};
    if (command == "xcheck")
        return {{"grid", {{"half_width", 12.0}, {"points", 96}}},
                {"times", {0.2, 1.0}},
                {"tolerances", {{"route", 1e-5}, {"oracle", 1e-3}}}};
    if (command == "certify")
        return {{"grid", {{"half_width", 8.0}, {"points", 512}}}, {"times", {{"log_uniform", {0.01, 1.0, 10}}}}};
    if (command == "levi")
        return {{"grid", {{"half_width", 3.0 * pi}, {"points", 96}}},
                {"levi", {{"T", 1.0}, {"steps", 32}, {"max_sweeps", 200}}},
                {"tolerances", {{"volterra", 1e-8}, {"oracle", 1e-2}}}};
    if (command == "solve") return {{"grid", {{"half_width", 8.0}, {"points", 256}}}, {"solve", {{"steps", 200}}}};
    return json::object();
}

json effective_config(const run_options& opt) {
    std::ifstream in(opt.config);
    if (!in) throw config_error("cannot open config " + opt.config.string());
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw config_error("config " + opt.config.string() + ": " + e.what());
    }
    if (!cfg.is_object()) throw config_error("config must be a JSON object");
    if (cfg.contains("command") && cfg["command"] != opt.command)
        throw config_error("config is for command " + cfg["command"].dump() + ", not " + opt.command);
    cfg["command"] = opt.command;
    if (opt.quick) merge(cfg, quick_profile(opt.command));
    if (opt.seed) cfg["seed"] = *opt.seed;
    if (!cfg.contains("seed")) cfg["seed"] = 0;
    return cfg;
}

int run(const run_options& opt) {
    try {
        auto it = commands().find(opt.command);
        if (it == commands().end()) throw config_error("unknown command " + opt.command);
        context c;
        c.config = effective_config(opt);
        c.digest = config_digest(c.config);
        c.config_dir = opt.config.has_parent_path() ? opt.config.parent_path() : fs::path(".");
        c.output = opt.output;
        c.seed = c.config["seed"].get<std::uint64_t>();
        fs::create_directories(c.output);
        write_json(c.artifact(opt.command + "_config.json"), {{"config", c.config}, {"config_digest", c.digest}});
        return it->second(c);
    } catch (const parabolicity_error& e) {
        std::fprintf(stderr, "error: system is not parabolic: %s (delta = %.3e)\n", e.what(), e.delta());
        return config_failure;
    } catch (const divergence_error& e) {
        std::fprintf(stderr, "error: numerical divergence: %s (norm %.3e)\n", e.what(), e.norm());
        return divergence;
    } catch (const conditioning_error& e) {
        std::fprintf(stderr, "error: numerical failure: %s\n", e.what());
        return divergence;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return config_failure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return config_failure;
    }
}

}  // namespace fracpar::cli
