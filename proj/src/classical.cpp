#include <algorithm>
#include <cmath>

#include "fracpar/error.hpp"
#include "fracpar/kernels.hpp"
#include "fracpar/matrix_tools.hpp"
#include "fracpar/parallel.hpp"
#include "fracpar/simd.hpp"
#include "synthesis.hpp"

namespace fracpar {

namespace detail {

void tensor_synthesis(const std::vector<cplx>& coeff, int n, std::size_t nk, double xi0, double dxi,
                      const std::vector<std::vector<double>>& axis_points, std::vector<cplx>& out) {
    const auto& simd = simd::active();
    std::vector<std::size_t> dims(n, nk);
    std::vector<cplx> cur = coeff, next, gather, res;
    for (int a = 0; a < n; ++a) {
        const std::size_t np = axis_points[a].size();
        std::size_t outer = 1, inner = 1;
        for (int j = 0; j < a; ++j) outer *= dims[j];
        for (int j = a + 1; j < n; ++j) inner *= dims[j];
        next.assign(outer * np * inner, cplx(0.0, 0.0));
        gather.resize(nk);
        res.resize(np);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t i = 0; i < inner; ++i) {
                bool any = false;
                for (std::size_t k = 0; k < nk; ++k) {
                    gather[k] = cur[(o * nk + k) * inner + i];
                    any = any || gather[k] != cplx(0.0, 0.0);
                }
                if (!any) continue;
                simd.lattice_synthesis(axis_points[a].data(), np, xi0, dxi, gather.data(), nk, res.data());
                for (std::size_t p = 0; p < np; ++p) next[(o * np + p) * inner + i] = res[p];
            }
        dims[a] = np;
        cur.swap(next);
    }
    out.swap(cur);
}

void lattice_index(std::size_t linear, int n, int K, std::vector<int>& k) {
    const std::size_t nk = 2 * static_cast<std::size_t>(K) + 1;
    k.resize(n);
    for (int d = n - 1; d >= 0; --d) {
        k[d] = static_cast<int>(linear % nk) - K;
        linear /= nk;
    }
}

}  // namespace detail

namespace {

constexpr double lattice_decay = 42.0;   // e^{-42} at the frequency cutoff
constexpr double cutoff_rel = 1e-13;     // profile level defining r0
constexpr double max_period = 4096.0;

cmatrix symbol_exponential(const constant_operator& op, const std::vector<double>& eta, double s) {
    const cmatrix A = s * op.symbol(eta);
    if (A.rows() == 1) return cmatrix::Constant(1, 1, std::exp(A(0, 0)));
    return expm(A);
}

}  // namespace

classical_profile::classical_profile(const constant_operator& op)
    : classical_profile(op, multi_index(std::vector<int>(op.n(), 0))) {}

classical_profile::classical_profile(const constant_operator& op, multi_index beta)
    : n_(op.n()), N_(op.N()), b_(op.b()), beta_(std::move(beta)), op_(op) {
    if (beta_.dim() == 0) beta_ = multi_index(std::vector<int>(n_, 0));
    if (beta_.dim() != n_) throw precondition_error("classical_profile: derivative index has wrong dimension");
    delta_ = require_parabolic(op_);
    xi_max_ = std::pow((lattice_decay + beta_.order() * 2.0) / delta_, 1.0 / (2 * b_));

    // Sample directions for locating r0.
    const auto dirs = n_ == 1 ? std::vector<std::vector<double>>{{1.0}, {-1.0}} : sphere_samples(n_, 8 * n_);
    for (double P = 32.0;; P *= 2.0) {
        if (P > max_period) throw evaluation_failure("classical_profile: kernel does not decay within the maximal period");
        build(P);
        const double step = 0.5 * pi / xi_max_;
        const int ns = static_cast<int>(0.5 * P / step);
        std::vector<double> mags;
        std::vector<double> radii;
        for (const auto& d : dirs) {
            for (int i = 0; i <= ns; ++i) {
                const double r = i * step;
                std::vector<double> y(n_);
                for (int j = 0; j < n_; ++j) y[j] = r * d[j];
                mags.push_back((*this)(y).cwiseAbs().maxCoeff());
                radii.push_back(r);
            }
        }
        const double m0 = *std::max_element(mags.begin(), mags.end());
        double r0 = 0.0;
        for (std::size_t i = 0; i < mags.size(); ++i)
            if (mags[i] > cutoff_rel * m0) r0 = std::max(r0, radii[i]);
        r0 += step;
        if (r0 < 0.4 * P) {
            r0_ = r0;
            peak_ = m0;
            return;
        }
    }
}

void classical_profile::build(double P) {
    period_ = P;
    dxi_ = 2.0 * pi / P;
    K_ = static_cast<int>(std::ceil(xi_max_ / dxi_));
    const std::size_t nk = 2 * static_cast<std::size_t>(K_) + 1;
    std::size_t total = 1;
    for (int d = 0; d < n_; ++d) total *= nk;
    coeff_.assign(static_cast<std::size_t>(N_ * N_), std::vector<cplx>(total));
    const double norm = std::pow(dxi_ / (2.0 * pi), n_);
    parallel_for(total, [&](std::size_t lin) {
        std::vector<int> k;
        detail::lattice_index(lin, n_, K_, k);
        std::vector<double> eta(n_);
        for (int d = 0; d < n_; ++d) eta[d] = k[d] * dxi_;
        const cmatrix E = symbol_exponential(op_, eta, 1.0) * (norm * beta_.monomial(eta));
        for (int i = 0; i < N_; ++i)
            for (int j = 0; j < N_; ++j) coeff_[i * N_ + j][lin] = E(i, j);
    });
}

cmatrix classical_profile::operator()(const std::vector<double>& y) const {
    if (static_cast<int>(y.size()) != n_) throw precondition_error("classical_profile: point has wrong dimension");
    cmatrix out(N_, N_);
    const std::size_t nk = 2 * static_cast<std::size_t>(K_) + 1;
    if (n_ == 1) {
        std::vector<std::vector<cplx>> v;
        evaluate_1d(y.data(), 1, v);
        for (int e = 0; e < N_ * N_; ++e) out(e / N_, e % N_) = v[e][0];
        return out;
    }
    std::vector<std::vector<double>> axes(n_);
    for (int d = 0; d < n_; ++d) axes[d] = {y[d]};
    std::vector<cplx> r;
    for (int e = 0; e < N_ * N_; ++e) {
        detail::tensor_synthesis(coeff_[e], n_, nk, -K_ * dxi_, dxi_, axes, r);
        out(e / N_, e % N_) = r[0];
    }
    return out;
}

void classical_profile::evaluate_1d(const double* y, std::size_t np, std::vector<std::vector<cplx>>& out) const {
    if (n_ != 1) throw precondition_error("classical_profile: evaluate_1d needs n = 1");
    const std::size_t nk = 2 * static_cast<std::size_t>(K_) + 1;
    out.resize(static_cast<std::size_t>(N_ * N_));
    const auto& simd = simd::active();
    for (int e = 0; e < N_ * N_; ++e) {
        out[e].resize(np);
        simd.lattice_synthesis(y, np, -K_ * dxi_, dxi_, coeff_[e].data(), nk, out[e].data());
    }
}

kernel_field classical_fscp(const constant_operator& op, double s, const grid_spec& grid, const multi_index& beta_in) {
    grid.validate();
    if (!(s > 0.0)) throw precondition_error("classical_fscp: s must be positive");
    if (grid.n != op.n()) throw config_error("classical_fscp: grid dimension differs from operator dimension");
    const multi_index beta = beta_in.dim() == 0 ? multi_index(std::vector<int>(op.n(), 0)) : beta_in;
    const double delta = require_parabolic(op);
    const double h = grid.spacing();
    const double xi_nyq = pi / h;
    const int b = op.b();
    if (delta * s * std::pow(xi_nyq, 2 * b) < 28.0) {
        const double need = std::pow(28.0 / (delta * s), 1.0 / (2 * b));
        throw cutoff_refusal("classical_fscp: frequency cutoff " + std::to_string(xi_nyq) +
                                 " too small for s = " + std::to_string(s) + "; need at least " + std::to_string(need),
                             need);
    }
    const int n = op.n(), N = op.N();
    const int K = grid.points_per_axis / 2;
    const double dxi = pi / grid.half_width;
    const std::size_t nk = 2 * static_cast<std::size_t>(K) + 1;
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= nk;
    std::vector<std::vector<cplx>> coeff(static_cast<std::size_t>(N * N), std::vector<cplx>(total));
    const double norm = std::pow(dxi / (2.0 * pi), n);
    parallel_for(total, [&](std::size_t lin) {
        std::vector<int> k;
        detail::lattice_index(lin, n, K, k);
        std::vector<double> eta(n);
        for (int d = 0; d < n; ++d) eta[d] = k[d] * dxi;
        const cmatrix E = symbol_exponential(op, eta, s) * (norm * beta.monomial(eta));
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) coeff[i * N + j][lin] = E(i, j);
    });
    std::vector<double> axis(grid.points_per_axis);
    for (int i = 0; i < grid.points_per_axis; ++i) axis[i] = grid.coordinate(i);
    const std::vector<std::vector<double>> axes(n, axis);

    kernel_field f;
    f.grid = grid;
    f.times = {s};
    f.kind = field_kind::Z;
    f.derivative = beta;
    f.N = N;
    f.values.assign(grid.size(), cmatrix::Zero(N, N));
    f.singular.assign(grid.size(), 0);
    std::vector<cplx> r;
    for (int e = 0; e < N * N; ++e) {
        detail::tensor_synthesis(coeff[e], n, nk, -K * dxi, dxi, axes, r);
        for (std::size_t p = 0; p < grid.size(); ++p) f.values[p](e / N, e % N) = r[p];
    }
    return f;
}

}  // namespace fracpar
