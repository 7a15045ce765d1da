#include "fracpar/levi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "fracpar/error.hpp"
#include "fracpar/kernel_io.hpp"
#include "fracpar/matrix_tools.hpp"
#include "fracpar/parallel.hpp"

namespace fracpar {

std::vector<double> levi_discretization::times() const {
    std::vector<double> t(steps);
    for (int k = 1; k <= steps; ++k) t[k - 1] = k * dt();
    return t;
}

void levi_discretization::validate() const {
    fractional_order a(alpha);
    grid.validate();
    if (grid.n != 1) throw config_error("levi: only n = 1 is supported");
    if (!(T > 0.0) || steps < 2) throw config_error("levi: T > 0 and at least 2 time steps required");
}

namespace {

std::pair<int, int> key(field_kind kind, int order) { return {static_cast<int>(kind), order}; }

constexpr field_kind table_kinds[] = {field_kind::Z_alpha, field_kind::Y_alpha, field_kind::Y_alpha_int1,
                                      field_kind::Y_alpha_int2};

}  // namespace

parametrix_provider::parametrix_provider(const variable_system& sys, const levi_discretization& disc)
    : sys_(sys), disc_(disc) {
    sys_.validate();
    disc_.validate();
    if (sys_.n != 1) throw config_error("levi: only n = 1 is supported");
    std::set<int> ord{0};
    for (const auto& [beta, fn] : sys_.principal) ord.insert(beta.order());
    for (const auto& [beta, fn] : sys_.lower) ord.insert(beta.order());
    orders_.assign(ord.begin(), ord.end());

    const std::size_t P = points(), T = disc_.steps;
    const std::size_t NN = static_cast<std::size_t>(N() * N());
    const grid_spec dg = difference_grid();
    const std::size_t D = dg.size();
    for (field_kind kind : table_kinds)
        for (int o : orders_) {
            table& t = tables_[key(kind, o)];
            t.data.resize(P);
            t.sing.resize(P);
        }
    const auto times = disc_.times();
    // Each task writes only the slot of its own freezing point.
    parallel_for(P, [&](std::size_t j) {
        const constant_operator op = freeze(sys_, disc_.grid.point(j));
        for (field_kind kind : table_kinds)
            for (int o : orders_) {
                const kernel_field f =
                    fractional_kernel(op, disc_.alpha, kind, times, dg, kernel_route::fourier, multi_index({o}),
                                      disc_.kernel);
                table& t = tables_.at(key(kind, o));
                std::vector<cplx> data(T * D * NN);
                for (std::size_t q = 0; q < T * D; ++q)
                    for (int r = 0; r < N(); ++r)
                        for (int c = 0; c < N(); ++c) data[q * NN + r * N() + c] = f.values[q](r, c);
                t.data[j] = std::move(data);
                t.sing[j] = f.singular;
            }
    });
    // Exact x-integrals of the order-0 kinds: I, t^{alpha-1}/Gamma(alpha), and their time integrals.
    for (field_kind kind : table_kinds) {
        auto& corr = corrections_[static_cast<int>(kind)];
        corr.assign(P * T, cmatrix::Zero(N(), N()));
        const table& t = tables_.at(key(kind, 0));
        const double bml = kind_ml_beta(kind, disc_.alpha) - 1.0;
        const double h = disc_.grid.spacing();
        for (std::size_t j = 0; j < P; ++j)
            for (std::size_t k = 0; k < T; ++k) {
                const double mass = kind == field_kind::Z_alpha ? 1.0 : std::pow(times[k], bml) / std::tgamma(bml + 1.0);
                cmatrix sum = cmatrix::Zero(N(), N());
                for (std::size_t d = 0; d < D; ++d)
                    for (int r = 0; r < N(); ++r)
                        for (int c = 0; c < N(); ++c) sum(r, c) += t.data[j][(k * D + d) * NN + r * N() + c];
                corr[j * T + k] = (mass * cmatrix::Identity(N(), N()) - h * sum) / h;
            }
    }
    double peak = 0.0, edge = 0.0;
    const double L = disc_.grid.half_width, h = disc_.grid.spacing();
    for (field_kind kind : {field_kind::Z_alpha, field_kind::Y_alpha}) {
        const table& t = tables_.at(key(kind, 0));
        for (std::size_t j = 0; j < P; ++j)
            for (std::size_t k = 0; k < T; ++k)
                for (std::size_t d = 0; d < D; ++d) {
                    const double far = std::abs(static_cast<double>(d) - static_cast<double>(P)) * h;
                    for (std::size_t e = 0; e < NN; ++e) {
                        const double v = std::abs(t.data[j][(k * D + d) * NN + e]);
                        peak = std::max(peak, v);
                        if (far >= L) edge = std::max(edge, v);
                    }
                }
    }
    truncation_ = peak > 0.0 ? edge / peak : 0.0;
}

grid_spec parametrix_provider::difference_grid() const {
    return grid_spec(1, 2.0 * disc_.grid.half_width, 2 * disc_.grid.points_per_axis);
}

bool parametrix_provider::has(field_kind kind, int order) const { return tables_.count(key(kind, order)) > 0; }

const parametrix_provider::table& parametrix_provider::get(field_kind kind, int order) const {
    auto it = tables_.find(key(kind, order));
    if (it == tables_.end())
        throw precondition_error(std::string("parametrix provider: no table for ") + to_string(kind) + " order " +
                                 std::to_string(order));
    return it->second;
}

cmatrix parametrix_provider::mass_correction(field_kind kind, std::size_t k, std::size_t j) const {
    auto it = corrections_.find(static_cast<int>(kind));
    if (it == corrections_.end())
        throw precondition_error(std::string("parametrix provider: no mass correction for ") + to_string(kind));
    return it->second.at(j * disc_.steps + k);
}

const cplx* parametrix_provider::raw(field_kind kind, int order, std::size_t j, std::size_t k, std::size_t d) const {
    const std::size_t D = 2 * points(), NN = static_cast<std::size_t>(N() * N());
    return get(kind, order).data[j].data() + (k * D + d) * NN;
}

cmatrix parametrix_provider::at(field_kind kind, int order, std::size_t k, std::size_t i, std::size_t j) const {
    const cplx* v = raw(kind, order, j, k, i + points() - j);
    cmatrix m(N(), N());
    for (int r = 0; r < N(); ++r)
        for (int c = 0; c < N(); ++c) m(r, c) = v[r * N() + c];
    return m;
}

bool parametrix_provider::singular(field_kind kind, int order, std::size_t k, std::size_t i, std::size_t j) const {
    return get(kind, order).sing[j][k * 2 * points() + i + points() - j] != 0;
}

kernel_field parametrix_provider::field(field_kind kind, int order, std::size_t j) const {
    const table& t = get(kind, order);
    kernel_field f;
    f.grid = difference_grid();
    f.times = disc_.times();
    f.kind = kind;
    f.derivative = multi_index({order});
    f.N = N();
    const std::size_t Q = f.grid.size() * f.times.size(), NN = static_cast<std::size_t>(N() * N());
    f.values.resize(Q);
    for (std::size_t q = 0; q < Q; ++q) {
        f.values[q].resize(N(), N());
        for (int r = 0; r < N(); ++r)
            for (int c = 0; c < N(); ++c) f.values[q](r, c) = t.data[j][q * NN + r * N() + c];
    }
    f.singular = t.sing[j];
    return f;
}

const char* to_string(density_kind k) { return k == density_kind::Q ? "Q" : "Phi"; }

double levi_field::sup_norm() const {
    double s = 0.0;
    for (const auto& v : values)
        if (v.size()) s = std::max(s, v.cwiseAbs().maxCoeff());
    return s;
}

namespace {

/// Coefficients c_beta(x_i, y_j) of A(x,D) - A0(y,D): a(x_i) - a(y_j) for principal terms, a(x_i) for lower ones.
struct coefficient_tables {
    struct term {
        int order;
        bool principal;
        std::vector<cmatrix> at;  // per grid point
    };
    std::vector<term> terms;

    explicit coefficient_tables(const parametrix_provider& p) {
        const auto& sys = p.system();
        const grid_spec& g = p.discretization().grid;
        auto add = [&](const auto& fns, bool principal) {
            for (const auto& [beta, fn] : fns) {
                term t{beta.order(), principal, {}};
                for (std::size_t i = 0; i < g.size(); ++i) {
                    t.at.push_back(fn(g.point(i)));
                    require_finite(t.at.back(), "levi: coefficient value");
                }
                terms.push_back(std::move(t));
            }
        };
        add(sys.principal, true);
        add(sys.lower, false);
    }

    cmatrix coefficient(const term& t, std::size_t i, std::size_t j) const {
        return t.principal ? cmatrix(t.at[i] - t.at[j]) : t.at[i];
    }
};

/// [A(x_i,D) - A0(y_j,D)] applied to a kernel kind frozen at y_j, at time index k; singular entries count as zero.
cmatrix apply_difference(const parametrix_provider& p, const coefficient_tables& ct, field_kind kind, std::size_t k,
                         std::size_t i, std::size_t j) {
    const int N = p.N();
    cmatrix acc = cmatrix::Zero(N, N);
    const std::size_t d = i + p.points() - j;
    for (const auto& t : ct.terms) {
        const cmatrix c = ct.coefficient(t, i, j);
        if (c.cwiseAbs().maxCoeff() == 0.0) continue;
        if (p.singular(kind, t.order, k, i, j)) continue;
        const cplx* v = p.raw(kind, t.order, j, k, d);
        cmatrix m(N, N);
        for (int r = 0; r < N; ++r)
            for (int cc = 0; cc < N; ++cc) m(r, cc) = v[r * N + cc];
        acc += c * m;
    }
    return acc;
}

/// Diagonal correction of the time-integrated K family: only order-0 lower terms survive at x = xi.
cmatrix difference_correction(const parametrix_provider& p, const coefficient_tables& ct, field_kind kind,
                              std::size_t k, std::size_t j) {
    cmatrix acc = cmatrix::Zero(p.N(), p.N());
    for (const auto& t : ct.terms)
        if (!t.principal && t.order == 0) acc += t.at[j] * p.mass_correction(kind, k, j);
    return acc;
}

/// Product-integration weights of one kernel family over the node grid, spatial weight h included.
/// conv_k = F_k D_1 + sum_{l=2}^{k-1} P_{k-l} D_l + P_0 D_k (singular first interval), or
/// conv_k = R_k g_0 + sum_{l=1}^{k-1} P_{k-l} g_l + P_0 g_k (values linear on every interval).
struct pi_weights {
    std::vector<cmatrix> P, F, R;  // P[m], m = 0..T-1; F[k-1], R[k-1], k = 1..T
};

enum class family { volterra_kernel, parametrix };

pi_weights build_weights(const parametrix_provider& p, const coefficient_tables& ct, family fam) {
    const auto& disc = p.discretization();
    const int N = p.N();
    const std::size_t X = p.points(), T = disc.steps;
    const double dt = disc.dt(), h = disc.grid.spacing(), alpha = disc.alpha;
    pi_weights w;
    w.P.assign(T, cmatrix::Zero(X * N, X * N));
    w.F.assign(T, cmatrix::Zero(X * N, X * N));
    w.R.assign(T, cmatrix::Zero(X * N, X * N));
    parallel_for(X, [&](std::size_t j) {
        std::vector<cmatrix> G1(T + 1, cmatrix::Zero(N, N)), G2(T + 1, cmatrix::Zero(N, N));
        for (std::size_t i = 0; i < X; ++i) {
            for (std::size_t m = 1; m <= T; ++m) {
                if (fam == family::volterra_kernel) {
                    G1[m] = apply_difference(p, ct, field_kind::Y_alpha_int1, m - 1, i, j);
                    G2[m] = apply_difference(p, ct, field_kind::Y_alpha_int2, m - 1, i, j);
                    if (i == j) {
                        G1[m] += difference_correction(p, ct, field_kind::Y_alpha_int1, m - 1, j);
                        G2[m] += difference_correction(p, ct, field_kind::Y_alpha_int2, m - 1, j);
                    }
                } else {
                    G1[m] = p.at(field_kind::Y_alpha_int1, 0, m - 1, i, j);
                    G2[m] = p.at(field_kind::Y_alpha_int2, 0, m - 1, i, j);
                    if (i == j) {
                        G1[m] += p.mass_correction(field_kind::Y_alpha_int1, m - 1, j);
                        G2[m] += p.mass_correction(field_kind::Y_alpha_int2, m - 1, j);
                    }
                }
            }
            std::vector<cmatrix> A(T + 1), B(T + 1), S(T + 1);
            for (std::size_t m = 1; m <= T; ++m) {
                A[m] = (G2[m] - G2[m - 1] - dt * G1[m - 1]) / dt;
                B[m] = (G1[m] - G1[m - 1]) - A[m];
                // G ~ p + q s on the interval (s = 1 at its left end), matched to the two exact moments.
                const cmatrix m0 = G1[m] - G1[m - 1];
                const cmatrix q = 12.0 * (A[m] - 0.5 * m0) / dt;
                const cmatrix pp = m0 / dt - 0.5 * q;
                S[m] = dt * (pp / (1.0 - alpha) + q / (2.0 - alpha));
            }
            auto put = [&](cmatrix& target, const cmatrix& v) { target.block(i * N, j * N, N, N) = h * v; };
            put(w.P[0], A[1]);
            for (std::size_t m = 1; m < T; ++m) put(w.P[m], A[m + 1] + B[m]);
            put(w.F[0], S[1]);
            for (std::size_t k = 2; k <= T; ++k) put(w.F[k - 1], S[k] + B[k - 1]);
            for (std::size_t k = 1; k <= T; ++k) put(w.R[k - 1], B[k]);
        }
    });
    return w;
}

/// Time-space convolution of node values (vals[l-1] at t_l; g0 at t = 0 for the regular basis).
std::vector<cmatrix> convolve(const pi_weights& w, const std::vector<cmatrix>& vals, const cmatrix* g0) {
    const std::size_t T = vals.size();
    std::vector<cmatrix> out(T);
    parallel_for(T, [&](std::size_t km1) {
        const std::size_t k = km1 + 1;
        cmatrix acc;
        if (g0) {
            acc = w.R[km1] * (*g0);
            for (std::size_t l = 1; l < k; ++l) acc.noalias() += w.P[k - l] * vals[l - 1];
        } else {
            acc = w.F[km1] * vals[0];
            for (std::size_t l = 2; l < k; ++l) acc.noalias() += w.P[k - l] * vals[l - 1];
        }
        // F_1 already covers the whole first interval in the singular basis.
        if (g0 || k >= 2) acc.noalias() += w.P[0] * vals[k - 1];
        out[km1] = std::move(acc);
    });
    return out;
}

double sup_diff(const std::vector<cmatrix>& a, const std::vector<cmatrix>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, (a[k] - b[k]).cwiseAbs().maxCoeff());
    return s;
}

double sup_all(const std::vector<cmatrix>& a) {
    double s = 0.0;
    for (const auto& m : a)
        if (m.size()) s = std::max(s, m.cwiseAbs().maxCoeff());
    return s;
}

std::vector<cmatrix> inhomogeneity_field(const parametrix_provider& p, const coefficient_tables& ct,
                                         inhomogeneity_kind kind) {
    const int N = p.N();
    const std::size_t X = p.points(), T = p.discretization().steps;
    const field_kind fk = kind == inhomogeneity_kind::M ? field_kind::Z_alpha : field_kind::Y_alpha;
    std::vector<cmatrix> out(T, cmatrix::Zero(X * N, X * N));
    parallel_for(T, [&](std::size_t k) {
        for (std::size_t i = 0; i < X; ++i)
            for (std::size_t j = 0; j < X; ++j) out[k].block(i * N, j * N, N, N) = apply_difference(p, ct, fk, k, i, j);
    });
    return out;
}

levi_field wrap(const parametrix_provider& p, std::vector<cmatrix> values) {
    levi_field f;
    f.grid = p.discretization().grid;
    f.times = p.discretization().times();
    f.N = p.N();
    f.values = std::move(values);
    return f;
}

/// Successive substitution x = b + conv(x); relative update norms recorded.
std::vector<cmatrix> substitute(const pi_weights& w, const std::vector<cmatrix>& b, const cmatrix* g0,
                                const volterra_options& opt, std::vector<double>& updates, double scale,
                                const std::string& what) {
    std::vector<cmatrix> x = b;
    if (scale == 0.0) return x;
    int growing = 0;
    for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
        auto c = convolve(w, x, g0);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += b[k];
        const double up = sup_diff(c, x) / scale;
        x = std::move(c);
        updates.push_back(up);
        if (!std::isfinite(up)) throw divergence_error(what + ": non-finite update", up);
        if (up < opt.tol) return x;
        if (updates.size() >= 2 && up > updates[updates.size() - 2]) {
            if (++growing >= 3)
                throw divergence_error(what + ": update grew for 3 consecutive sweeps (last " + std::to_string(up) + ")",
                                       up);
        } else {
            growing = 0;
        }
    }
    throw divergence_error(what + ": no convergence within " + std::to_string(opt.max_sweeps) + " sweeps (last update " +
                               std::to_string(updates.back()) + ")",
                           updates.back());
}

}  // namespace

cmatrix levi_inhomogeneity(const parametrix_provider& p, inhomogeneity_kind kind, std::size_t k, std::size_t i,
                           std::size_t j) {
    if (i == j) throw singular_point("levi inhomogeneity: x = xi");
    if (k >= static_cast<std::size_t>(p.discretization().steps) || i >= p.points() || j >= p.points())
        throw precondition_error("levi inhomogeneity: index out of range");
    const coefficient_tables ct(p);
    return apply_difference(p, ct, kind == inhomogeneity_kind::M ? field_kind::Z_alpha : field_kind::Y_alpha, k, i, j);
}

volterra_density solve_volterra(density_kind kind, const parametrix_provider& p, const volterra_options& opt) {
    if (!(opt.tol > 0.0) || opt.max_sweeps < 1) throw precondition_error("solve_volterra: tol > 0 and max_sweeps >= 1");
    const coefficient_tables ct(p);
    const auto b = inhomogeneity_field(p, ct, kind == density_kind::Q ? inhomogeneity_kind::M : inhomogeneity_kind::K);
    volterra_density d;
    d.kind = kind;
    d.tol = opt.tol;
    const double scale = sup_all(b);
    d.scale = scale;
    std::vector<cmatrix> x;
    if (scale == 0.0) {
        x = b;
        d.iteration_count = 1;
        d.residual = 0.0;
        d.updates.push_back(0.0);
    } else {
        const auto w = build_weights(p, ct, family::volterra_kernel);
        x = substitute(w, b, nullptr, opt, d.updates, scale, std::string("Volterra equation for ") + to_string(kind));
        d.iteration_count = static_cast<int>(d.updates.size());
        auto c = convolve(w, x, nullptr);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += b[k];
        d.residual = sup_diff(c, x) / scale;
    }
    d.field = wrap(p, std::move(x));
    return d;
}

green_samples green_assemble(const parametrix_provider& p, const volterra_density& Q, const volterra_density& Phi) {
    const int N = p.N();
    const std::size_t X = p.points(), T = p.discretization().steps;
    if (Q.field.values.size() != T || Phi.field.values.size() != T)
        throw precondition_error("green_assemble: densities do not match the provider grid");
    const coefficient_tables ct(p);
    const auto w = build_weights(p, ct, family::parametrix);
    green_samples g;
    g.V_Z = wrap(p, convolve(w, Q.field.values, nullptr));
    g.V_Y = wrap(p, convolve(w, Phi.field.values, nullptr));
    std::vector<cmatrix> z(T, cmatrix::Zero(X * N, X * N)), y = z;
    parallel_for(T, [&](std::size_t k) {
        for (std::size_t i = 0; i < X; ++i)
            for (std::size_t j = 0; j < X; ++j) {
                z[k].block(i * N, j * N, N, N) = p.at(field_kind::Z_alpha, 0, k, i, j) + g.V_Z.values[k].block(i * N, j * N, N, N);
                y[k].block(i * N, j * N, N, N) = p.at(field_kind::Y_alpha, 0, k, i, j) + g.V_Y.values[k].block(i * N, j * N, N, N);
            }
    });
    g.Z1 = wrap(p, std::move(z));
    g.Y1 = wrap(p, std::move(y));
    return g;
}

trajectory cauchy_solve(const parametrix_provider& p, const green_samples& g, const sampled_field& u0,
                        const field_source_fn& f) {
    const auto& disc = p.discretization();
    const int N = p.N();
    const std::size_t X = p.points(), T = disc.steps;
    if (u0.rows() != N || u0.cols() != static_cast<Eigen::Index>(X))
        throw precondition_error("cauchy_solve: initial data does not match the grid");
    const double h = disc.grid.spacing();
    const cvector v0 = Eigen::Map<const cvector>(u0.data(), u0.size());
    std::vector<cvector> u(T + 1);
    u[0] = v0;
    for (std::size_t k = 0; k < T; ++k) {
        u[k + 1] = h * (g.Z1.values[k] * v0);
        for (std::size_t i = 0; i < X; ++i)
            u[k + 1].segment(i * N, N) += h * (p.mass_correction(field_kind::Z_alpha, k, i) * v0.segment(i * N, N));
    }
    if (f) {
        // Source term: Y0 * (f + phi) with phi = K * f + K * phi (the V_Y part rewritten through Phi's equation).
        const coefficient_tables ct(p);
        auto node = [&](double t) {
            cmatrix v(X * N, 1);
            for (std::size_t i = 0; i < X; ++i) {
                const cvector fi = f(t, disc.grid.point(i));
                if (fi.size() != N) throw precondition_error("cauchy_solve: source has the wrong size");
                v.block(i * N, 0, N, 1) = fi;
            }
            return v;
        };
        const cmatrix f0 = node(0.0);
        std::vector<cmatrix> fv(T);
        for (std::size_t k = 1; k <= T; ++k) fv[k - 1] = node(k * disc.dt());
        std::vector<cmatrix> gsum = fv;
        if (!ct.terms.empty()) {
            const auto wk = build_weights(p, ct, family::volterra_kernel);
            const auto b = convolve(wk, fv, &f0);
            const double scale = sup_all(b);
            if (scale > 0.0) {
                std::vector<double> updates;
                volterra_options vo;
                vo.tol = 1e-12;
                const auto phi = substitute(wk, b, nullptr, vo, updates, scale, "source density");
                // phi vanishes at t = 0, so the regular basis with g0 = f0 applies to f + phi.
                for (std::size_t k = 0; k < T; ++k) gsum[k] += phi[k];
            }
        }
        const auto wy = build_weights(p, ct, family::parametrix);
        const auto w = convolve(wy, gsum, &f0);
        for (std::size_t k = 0; k < T; ++k) u[k + 1] += w[k].col(0);
    }
    trajectory tr;
    tr.grid = disc.grid;
    tr.N = N;
    tr.alpha = disc.alpha;
    tr.dt = disc.dt();
    tr.corrected = false;
    for (std::size_t k = 0; k <= T; ++k) {
        tr.times.push_back(k * disc.dt());
        tr.values.push_back(Eigen::Map<const cmatrix>(u[k].data(), N, X));
    }
    return tr;
}

double shifted_grid_residual(const parametrix_provider& fine, const volterra_density& d) {
    const auto& disc = fine.discretization();
    const std::size_t Tc = d.field.values.size();
    if (static_cast<std::size_t>(disc.steps) != 2 * Tc || disc.grid.points_per_axis != d.field.grid.points_per_axis)
        throw precondition_error("shifted_grid_residual: the provider must have twice the density's time steps");
    const coefficient_tables ct(fine);
    const auto b = inhomogeneity_field(fine, ct, d.kind == density_kind::Q ? inhomogeneity_kind::M : inhomogeneity_kind::K);
    const double scale = sup_all(b);
    if (scale == 0.0) return d.field.sup_norm();
    // Interpolate in the basis of the coarse quadrature: t^{-alpha} on the first interval, linear after.
    std::vector<cmatrix> x(2 * Tc);
    const double alpha = disc.alpha;
    for (std::size_t k = 1; k <= Tc; ++k) {
        x[2 * k - 1] = d.field.values[k - 1];
        x[2 * k - 2] = k == 1 ? cmatrix(d.field.values[0] * std::pow(0.5, -alpha))
                              : cmatrix(0.5 * (d.field.values[k - 2] + d.field.values[k - 1]));
    }
    const auto w = build_weights(fine, ct, family::volterra_kernel);
    const auto c = convolve(w, x, nullptr);
    double worst = 0.0;
    for (std::size_t k = 0; k < 2 * Tc; k += 2) worst = std::max(worst, (b[k] + c[k] - x[k]).cwiseAbs().maxCoeff());
    return worst / scale;
}

double time_doubling_change(const volterra_density& coarse, const volterra_density& fine) {
    const std::size_t Tc = coarse.field.values.size();
    if (fine.field.values.size() != 2 * Tc || fine.field.grid.points_per_axis != coarse.field.grid.points_per_axis ||
        fine.kind != coarse.kind)
        throw precondition_error("time_doubling_change: fine density must have twice the coarse steps");
    double worst = 0.0;
    for (std::size_t k = 0; k < Tc; ++k)
        worst = std::max(worst, (fine.field.values[2 * k + 1] - coarse.field.values[k]).cwiseAbs().maxCoeff());
    return coarse.scale > 0.0 ? worst / coarse.scale : worst;
}

std::vector<bound_sample> remainder_samples(const levi_field& v) {
    std::vector<bound_sample> out;
    const std::size_t X = v.grid.size();
    const double L = v.grid.half_width;
    for (std::size_t k = 0; k < v.times.size(); ++k)
        for (std::size_t i = 0; i < X; ++i) {
            const double x = v.grid.coordinate(static_cast<int>(i));
            if (std::abs(x) > 0.5 * L) continue;
            for (std::size_t j = 0; j < X; ++j) {
                const double xi = v.grid.coordinate(static_cast<int>(j));
                if (i == j || std::abs(xi) > 0.5 * L) continue;
                out.push_back({v.times[k], std::abs(x - xi), norm2(v.at(k, i, j))});
            }
        }
    return out;
}

estimate_report certify_remainder(const levi_field& v, bool is_z, const variable_system& sys,
                                  const certify_options& opt) {
    const double alpha = opt.alpha, gamma = sys.holder_exponent;
    const int n = sys.n, b = sys.b;
    if (n >= 2 * b) throw precondition_error("certify_remainder: implemented for n < 2b");
    const auto samples = remainder_samples(v);
    auto make_case = [&](double t_power, double x_power, const std::string& label) {
        bound_case c;
        c.kind = is_z ? field_kind::Z_alpha : field_kind::Y_alpha;
        c.n = n;
        c.b = b;
        c.order = 0;
        c.reg = regime::unified;
        c.form = {t_power, x_power, false, true};
        c.label = label;
        return c;
    };
    if (!is_z) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "V_Y: t^%.6g|x-xi|^%.6g exp(-sigma rho)", -1.0 + alpha, -n + gamma);
        return certify_bound(samples, make_case(-1.0 + alpha, -n + gamma, buf), opt);
    }
    estimate_report best;
    bool have = false;
    for (int s = 1; s <= 9; ++s) {
        const double g0 = gamma * s / 10.0;
        char buf[160];
        std::snprintf(buf, sizeof buf, "V_Z: t^%.6g|x-xi|^%.6g exp(-sigma rho), gamma0=%.3g", -alpha * g0 / (2.0 * b),
                      -n + gamma - g0, g0);
        auto r = certify_bound(samples, make_case(-alpha * g0 / (2.0 * b), -n + gamma - g0, buf), opt);
        const bool better = !have || (r.pass && !best.pass) || (r.pass == best.pass && r.sup_ratio < best.sup_ratio);
        if (better) {
            best = r;
            have = true;
        }
    }
    return best;
}

std::string levi_field_csv(const levi_field& f, const std::string& label, const std::string& digest) {
    std::string s = "# fracpar levi_field name=" + label + " digest=" + digest + "\n";
    s += "t,x1,xi1,i,j,re,im\n";
    const std::size_t X = f.grid.size();
    for (std::size_t k = 0; k < f.times.size(); ++k) {
        const std::string tt = format_number(f.times[k]);
        for (std::size_t i = 0; i < X; ++i) {
            const std::string xs = format_number(f.grid.coordinate(static_cast<int>(i)));
            for (std::size_t j = 0; j < X; ++j) {
                const std::string prefix = tt + "," + xs + "," + format_number(f.grid.coordinate(static_cast<int>(j)));
                const cmatrix m = f.at(k, i, j);
                for (int r = 0; r < f.N; ++r)
                    for (int c = 0; c < f.N; ++c)
                        s += prefix + "," + std::to_string(r) + "," + std::to_string(c) + "," +
                             format_number(m(r, c).real()) + "," + format_number(m(r, c).imag()) + "\n";
            }
        }
    }
    return s;
}

nlohmann::json levi_field_header(const levi_field& f, const std::string& label, const std::string& digest) {
    nlohmann::json h;
    h["format"] = "fracpar.levi_field.v1";
    h["name"] = label;
    h["N"] = f.N;
    h["grid"] = {{"n", f.grid.n},
                 {"half_width", f.grid.half_width},
                 {"points_per_axis", f.grid.points_per_axis},
                 {"spacing", f.grid.spacing()}};
    h["times"] = f.times;
    h["columns"] = "t,x1,xi1,i,j,re,im";
    h["config_digest"] = digest;
    return h;
}

}  // namespace fracpar
