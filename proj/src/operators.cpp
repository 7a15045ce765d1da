#include "fracpar/operators.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "fracpar/error.hpp"
#include "fracpar/matrix_tools.hpp"

namespace fracpar {

multi_index::multi_index(std::vector<int> comps) : c(std::move(comps)) {
    for (int v : c)
        if (v < 0) throw config_error("multi-index components must be nonnegative");
}

int multi_index::order() const noexcept { return std::accumulate(c.begin(), c.end(), 0); }

double multi_index::monomial(const std::vector<double>& xi) const {
    double m = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (int k = 0; k < c[i]; ++k) m *= xi[i];
    return m;
}

std::vector<multi_index> multi_indices_of_order(int n, int k) {
    std::vector<multi_index> out;
    std::vector<int> cur(n, 0);
    std::function<void(int, int)> rec = [&](int axis, int left) {
        if (axis == n - 1) {
            cur[axis] = left;
            out.emplace_back(cur);
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur[axis] = v;
            rec(axis + 1, left - v);
        }
    };
    if (n >= 1) rec(0, k);
    return out;
}

constant_operator::constant_operator(int n, int N, int b, std::map<multi_index, cmatrix> coeffs)
    : n_(n), N_(N), b_(b), coeffs_(std::move(coeffs)) {
    if (n < 1 || N < 1 || b < 1) throw config_error("operator: n, N and b must be positive");
    if (coeffs_.empty()) throw config_error("operator: no principal coefficients");
    for (const auto& [mu, a] : coeffs_) {
        if (mu.dim() != n) throw config_error("operator: multi-index dimension differs from n");
        if (mu.order() != 2 * b) throw config_error("operator: coefficient key of order other than 2b");
        if (a.rows() != N || a.cols() != N) throw config_error("operator: coefficient is not N x N");
        require_finite(a, "operator coefficient");
    }
}

cmatrix constant_operator::symbol(const std::vector<double>& xi) const {
    if (static_cast<int>(xi.size()) != n_) throw precondition_error("symbol: xi has wrong dimension");
    cmatrix s = cmatrix::Zero(N_, N_);
    for (const auto& [mu, a] : coeffs_) s += mu.monomial(xi) * a;
    return s;
}

constant_operator constant_operator::scaled(double s) const {
    auto c = coeffs_;
    for (auto& [mu, a] : c) a *= s;
    return {n_, N_, b_, std::move(c)};
}

constant_operator constant_operator::conjugated(const cmatrix& U) const {
    auto c = coeffs_;
    for (auto& [mu, a] : c) a = U.adjoint() * a * U;
    return {n_, N_, b_, std::move(c)};
}

std::vector<std::vector<double>> sphere_samples(int n, int count) {
    if (n < 1) throw precondition_error("sphere_samples: n must be positive");
    if (count < 2 * n) throw precondition_error("sphere_samples: need at least 2n samples");
    std::vector<std::vector<double>> out;
    if (n == 1) return {{1.0}, {-1.0}};
    if (n == 2) {
        for (int k = 0; k < count; ++k) {
            const double th = 2.0 * pi * k / count;
            out.push_back({std::cos(th), std::sin(th)});
        }
        return out;
    }
    if (n == 3) {
        const double golden = pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - (2.0 * k + 1.0) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            out.push_back({r * std::cos(golden * k), r * std::sin(golden * k), z});
        }
        return out;
    }
    // n >= 4: coordinate axes plus Halton points pushed through Box-Muller.
    for (int d = 0; d < n; ++d)
        for (double s : {1.0, -1.0}) {
            std::vector<double> e(n, 0.0);
            e[d] = s;
            out.push_back(e);
        }
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    auto halton = [](int i, int base) {
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * (i % base);
            i /= base;
        }
        return r;
    };
    const int dims_needed = n + (n % 2);
    if (dims_needed > 20) throw precondition_error("sphere_samples: dimension too large");
    for (int k = 1; static_cast<int>(out.size()) < count; ++k) {
        std::vector<double> g(dims_needed);
        for (int d = 0; d < dims_needed; d += 2) {
            const double u1 = halton(k, primes[d]), u2 = halton(k, primes[d + 1]);
            const double r = std::sqrt(-2.0 * std::log(std::max(u1, 1e-300)));
            g[d] = r * std::cos(2.0 * pi * u2);
            g[d + 1] = r * std::sin(2.0 * pi * u2);
        }
        g.resize(n);
        double nr = 0.0;
        for (double v : g) nr += v * v;
        nr = std::sqrt(nr);
        if (nr < 1e-12) continue;
        for (double& v : g) v /= nr;
        out.push_back(g);
    }
    return out;
}

double parabolicity_delta(const constant_operator& op, int sphere_sample_count) {
    double delta = std::numeric_limits<double>::infinity();
    for (const auto& eta : sphere_samples(op.n(), sphere_sample_count))
        delta = std::min(delta, dissipativity_constant(op.symbol(eta)));
    return delta;
}

double require_parabolic(const constant_operator& op, int sphere_sample_count) {
    const double d = parabolicity_delta(op, sphere_sample_count);
    if (!(d > 0.0))
        throw parabolicity_error("operator is not strongly parabolic: sampled delta = " + std::to_string(d), d);
    return d;
}

variable_system variable_system::from_constant(const constant_operator& op) {
    variable_system s;
    s.n = op.n();
    s.N = op.N();
    s.b = op.b();
    double bound = 0.0;
    for (const auto& [mu, a] : op.coeffs()) {
        cmatrix copy = a;
        s.principal[mu] = [copy](const std::vector<double>&) { return copy; };
        bound = std::max(bound, norm2(a));
    }
    s.holder_exponent = 1.0;
    s.holder_constant = 0.0;
    s.bound = bound;
    s.constant_principal = true;
    return s;
}

void variable_system::validate() const {
    if (n < 1 || N < 1 || b < 1) throw config_error("system: n, N and b must be positive");
    if (principal.empty()) throw config_error("system: no principal coefficients");
    for (const auto& [mu, f] : principal) {
        if (mu.dim() != n || mu.order() != 2 * b)
            throw config_error("system: principal key must have dimension n and order 2b");
        if (!f) throw config_error("system: empty coefficient function");
    }
    for (const auto& [mu, f] : lower) {
        if (mu.dim() != n || mu.order() >= 2 * b)
            throw config_error("system: lower-order key must have dimension n and order < 2b");
        if (!f) throw config_error("system: empty coefficient function");
    }
    if (!(holder_exponent > 0.0 && holder_exponent <= 1.0))
        throw config_error("system: Holder exponent must lie in (0,1]");
    if (holder_constant < 0.0 || bound < 0.0) throw config_error("system: negative Holder constant or bound");
}

constant_operator freeze(const variable_system& sys, const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != sys.n) throw precondition_error("freeze: y has wrong dimension");
    std::map<multi_index, cmatrix> c;
    for (const auto& [mu, f] : sys.principal) {
        cmatrix a = f(y);
        if (a.rows() != sys.N || a.cols() != sys.N) throw config_error("freeze: coefficient is not N x N");
        c.emplace(mu, std::move(a));
    }
    return {sys.n, sys.N, sys.b, std::move(c)};
}

system_check verify_system(const variable_system& sys, const grid_spec& grid, int sphere_sample_count) {
    sys.validate();
    system_check out;
    out.delta_min = std::numeric_limits<double>::infinity();
    const std::size_t P = grid.size();
    auto all_coeffs = [&](const std::vector<double>& x) {
        std::vector<cmatrix> v;
        for (const auto& [mu, f] : sys.principal) v.push_back(f(x));
        for (const auto& [mu, f] : sys.lower) v.push_back(f(x));
        return v;
    };
    std::vector<std::vector<cmatrix>> samples(P);
    for (std::size_t k = 0; k < P; ++k) {
        const auto x = grid.point(k);
        samples[k] = all_coeffs(x);
        for (const auto& a : samples[k]) out.max_coefficient = std::max(out.max_coefficient, norm2(a));
        if (!sys.constant_principal || k == 0)
            out.delta_min = std::min(out.delta_min, parabolicity_delta(freeze(sys, x), std::max(sphere_sample_count, 2 * sys.n)));
    }
    // Holder quotients on pairs at geometric separations.
    const double gamma = sys.holder_exponent;
    for (std::size_t k = 0; k < P; ++k) {
        for (std::size_t step = 1; step < P; step *= 2) {
            const std::size_t j = (k + step) % P;
            const auto xk = grid.point(k), xj = grid.point(j);
            double d2 = 0.0;
            for (int i = 0; i < sys.n; ++i) d2 += (xk[i] - xj[i]) * (xk[i] - xj[i]);
            const double dist = std::sqrt(d2);
            if (dist == 0.0) continue;
            for (std::size_t c = 0; c < samples[k].size(); ++c) {
                const double q = norm2(samples[k][c] - samples[j][c]) / std::pow(dist, gamma);
                out.max_holder_quotient = std::max(out.max_holder_quotient, q);
            }
        }
    }
    const double slack = 1e-12;
    out.bound_ok = out.max_coefficient <= sys.bound * (1.0 + slack) + slack;
    out.holder_ok = out.max_holder_quotient <= sys.holder_constant * (1.0 + slack) + slack;
    return out;
}

int stencil_half_width(int k) { return (k + 1) / 2; }

std::vector<double> derivative_stencil(int k, double h) {
    if (k < 0) throw precondition_error("derivative_stencil: negative order");
    auto convolve = [](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> c(a.size() + b.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
        return c;
    };
    std::vector<double> s{1.0};
    const std::vector<double> d2{1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)};
    for (int m = 0; m < k / 2; ++m) s = convolve(s, d2);
    if (k % 2 == 1) s = convolve(s, {-0.5 / h, 0.0, 0.5 / h});
    // Even orders give width 2(k/2)+1; odd orders 2((k+1)/2)+1, matching stencil_half_width.
    return s;
}

namespace {

cplx minus_i_power(int k) {
    switch (k % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

}  // namespace

fd_operator::fd_operator(const variable_system& sys, part_selector part, grid_spec grid, boundary_mode mode)
    : N_(sys.N), grid_(std::move(grid)), mode_(mode) {
    sys.validate();
    grid_.validate();
    if (grid_.n != sys.n) throw config_error("fd_operator: grid dimension differs from system dimension");
    const double h = grid_.spacing();
    const std::size_t P = grid_.size();

    auto add_terms = [&](const std::map<multi_index, coefficient_fn>& table, bool frozen_const) {
        for (const auto& [beta, f] : table) {
            term tm;
            tm.beta = beta;
            for (int d = 0; d < sys.n; ++d) tm.axis_weights.push_back(derivative_stencil(beta.c[d], h));
            const cplx phase = minus_i_power(beta.order());
            if (frozen_const) {
                tm.coeff.push_back(phase * f(part.y));
            } else {
                tm.coeff.resize(P);
                for (std::size_t k = 0; k < P; ++k) tm.coeff[k] = phase * f(grid_.point(k));
            }
            for (const auto& a : tm.coeff)
                if (a.rows() != N_ || a.cols() != N_) throw config_error("fd_operator: coefficient is not N x N");
            terms_.push_back(std::move(tm));
        }
    };
    switch (part.kind) {
        case operator_part::full:
            add_terms(sys.principal, false);
            add_terms(sys.lower, false);
            break;
        case operator_part::principal: add_terms(sys.principal, false); break;
        case operator_part::lower: add_terms(sys.lower, false); break;
        case operator_part::frozen:
            if (static_cast<int>(part.y.size()) != sys.n) throw precondition_error("frozen_at: y has wrong dimension");
            add_terms(sys.principal, true);
            break;
    }
}

template <class F>
void fd_operator::for_each_neighbor(const term& tm, std::size_t point, F&& f) const {
    const int n = grid_.n, M = grid_.points_per_axis;
    const auto base = grid_.unravel(point);
    std::vector<int> w(n), off(n);
    for (int d = 0; d < n; ++d) {
        w[d] = static_cast<int>(tm.axis_weights[d].size() / 2);
        off[d] = -w[d];
    }
    std::vector<int> idx(n);
    for (;;) {
        double weight = 1.0;
        for (int d = 0; d < n; ++d) {
            weight *= tm.axis_weights[d][off[d] + w[d]];
            int i = base[d] + off[d];
            if (i < 0 || i >= M) {
                if (mode_ == boundary_mode::padded)
                    throw domain_boundary_error("finite-difference stencil leaves the grid at point " +
                                                std::to_string(point) + "; pad the grid or restrict the evaluation");
                i = ((i % M) + M) % M;
            }
            idx[d] = i;
        }
        if (weight != 0.0) f(grid_.ravel(idx), weight);
        int d = n - 1;
        while (d >= 0 && ++off[d] > w[d]) {
            off[d] = -w[d];
            --d;
        }
        if (d < 0) break;
    }
}

cvector fd_operator::apply(const sampled_field& u, std::size_t point) const {
    if (u.rows() != N_ || static_cast<std::size_t>(u.cols()) != grid_.size())
        throw precondition_error("apply: field shape does not match N x grid size");
    if (point >= grid_.size()) throw precondition_error("apply: point index out of range");
    cvector out = cvector::Zero(N_);
    for (const auto& tm : terms_) {
        cvector d = cvector::Zero(N_);
        for_each_neighbor(tm, point, [&](std::size_t j, double w) { d += w * u.col(j); });
        const cmatrix& a = tm.coeff.size() == 1 ? tm.coeff[0] : tm.coeff[point];
        out += a * d;
    }
    return out;
}

sampled_field fd_operator::apply(const sampled_field& u) const {
    sampled_field out(N_, u.cols());
    for (std::size_t k = 0; k < grid_.size(); ++k) out.col(k) = apply(u, k);
    return out;
}

cmatrix fd_operator::assemble() const {
    const std::size_t P = grid_.size();
    cmatrix A = cmatrix::Zero(N_ * P, N_ * P);
    for (std::size_t k = 0; k < P; ++k)
        for (const auto& tm : terms_) {
            const cmatrix& a = tm.coeff.size() == 1 ? tm.coeff[0] : tm.coeff[k];
            for_each_neighbor(tm, k, [&](std::size_t j, double w) {
                A.block(k * N_, j * N_, N_, N_) += w * a;
            });
        }
    return A;
}

cvector apply(const variable_system& sys, part_selector part, const sampled_field& u, const grid_spec& grid,
              boundary_mode mode, std::size_t point) {
    return fd_operator(sys, std::move(part), grid, mode).apply(u, point);
}

}  // namespace fracpar
