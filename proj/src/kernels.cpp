#include "fracpar/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/special_functions/binomial.hpp>

#include "fracpar/error.hpp"
#include "fracpar/matrix_tools.hpp"
#include "fracpar/parallel.hpp"
#include "fracpar/quadrature.hpp"
#include "fracpar/simd.hpp"
#include "synthesis.hpp"

namespace fracpar {

const char* to_string(field_kind k) {
    switch (k) {
        case field_kind::Z: return "Z";
        case field_kind::Z_alpha: return "Z_alpha";
        case field_kind::Y_alpha: return "Y_alpha";
        case field_kind::dtZ_alpha: return "dtZ_alpha";
        case field_kind::Y_alpha_int1: return "Y_alpha_int1";
        case field_kind::Y_alpha_int2: return "Y_alpha_int2";
    }
    return "?";
}

const char* to_string(kernel_route r) { return r == kernel_route::subordination ? "subordination" : "fourier"; }

double kind_ml_beta(field_kind kind, double alpha) {
    switch (kind) {
        case field_kind::Z_alpha: return 1.0;
        case field_kind::Y_alpha: return alpha;
        case field_kind::dtZ_alpha: return 0.0;
        case field_kind::Y_alpha_int1: return alpha + 1.0;
        case field_kind::Y_alpha_int2: return alpha + 2.0;
        case field_kind::Z: break;
    }
    throw precondition_error("kind_ml_beta: classical kernel has no Mittag-Leffler symbol");
}

double ml_time_exponent(double ml_beta, double alpha, int n, int b, int order) {
    return ml_beta - 1.0 - alpha * (n + order) / (2.0 * b);
}

double kind_time_exponent(field_kind kind, double alpha, int n, int b, int order) {
    return ml_time_exponent(kind_ml_beta(kind, alpha), alpha, n, b, order);
}

namespace {

double binom(int n, int k) {
    if (k < 0 || k > n || n < 0) return 0.0;
    return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k));
}

double factorial(int k) { return std::tgamma(k + 1.0); }

double euclid(const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return std::sqrt(s);
}

std::vector<double> scaled(const std::vector<double>& y, double c) {
    std::vector<double> r(y);
    for (double& v : r) v *= c;
    return r;
}

constexpr int gl_points = 16;
constexpr double du0 = 0.5;
constexpr int max_level = 7;
constexpr double sigma_zero = 1e-4;  // y = 0: analytic piece below this
constexpr double weight_tail = 1e-18;
constexpr double roundoff_floor = 1e-14;

}  // namespace

sigma_weight wright_weight(double alpha, double beta_ml) {
    fractional_order a(alpha);
    sigma_weight w;
    const double mu = beta_ml - alpha;
    if (beta_ml == 1.0) {
        w.w = [alpha](double s) { return specfun::subordination_kernel(specfun::kernel_kind::phi, alpha, 1.0, s); };
    } else if (beta_ml == alpha) {
        w.w = [alpha](double s) { return specfun::subordination_kernel(specfun::kernel_kind::psi, alpha, 1.0, s); };
    } else if (beta_ml == 0.0) {
        w.w = [alpha](double s) { return specfun::subordination_kernel(specfun::kernel_kind::nu, alpha, 1.0, s); };
    } else {
        w.w = [alpha, mu](double s) {
            bool ok = false;
            const double v = specfun::wright_series(alpha, mu, s, &ok);
            if (!ok) throw evaluation_failure("wright_weight: series failed for a general parameter");
            return v;
        };
    }
    for (int k = 0; k < 12; ++k)
        w.taylor.push_back(((k % 2) ? -1.0 : 1.0) / factorial(k) * specfun::rgamma(mu - alpha * k));
    return w;
}

sigma_weight laguerre_weight(const std::vector<double>& c) {
    sigma_weight w;
    w.w = [c](double s) {
        double acc = 0.0, pw = 1.0;
        for (std::size_t m = 0; m < c.size(); ++m) {
            acc += c[m] * pw;
            pw *= s / (m + 1.0);
        }
        return std::exp(-s) * acc;
    };
    const int nt = 12;
    for (int k = 0; k < nt; ++k) {
        double a = 0.0;
        for (int j = 0; j <= k && j < static_cast<int>(c.size()); ++j)
            a += c[j] / factorial(j) * (((k - j) % 2) ? -1.0 : 1.0) / factorial(k - j);
        w.taylor.push_back(a);
    }
    return w;
}

subordinator::subordinator(std::shared_ptr<const classical_profile> profile, sigma_weight weight, double tol)
    : prof_(std::move(profile)), w_(std::move(weight)), tol_(tol) {
    p_ = (prof_->n() + prof_->beta().order()) / (2.0 * prof_->b());
    // Upper limit: past the peak of |w(s)| s^{1-p}, eight consecutive samples below weight_tail*peak.
    double peak = 0.0;
    int below = 0;
    double u = -8.0;
    for (;; u += 0.25) {
        if (u > 12.0) throw evaluation_failure("subordinator: weight does not decay");
        const double s = std::exp(u);
        const double f = std::abs(w_.w(s)) * std::exp(u * (1.0 - p_));
        peak = std::max(peak, f);
        if (f < weight_tail * peak) {
            if (++below >= 8) break;
        } else {
            below = 0;
        }
    }
    u_hi_ = u;
    levels_.resize(max_level + 1);
    // Reference weight mass over sigma >= 1/e: sets an absolute noise floor for tiny results.
    const int ref_panels = std::max(1, static_cast<int>(std::ceil((u_hi_ + 1.0) / du0)));
    ensure(0, ref_panels);
    w_ref_ = 0.0;
    for (double a : levels_[0]->absw) w_ref_ += a;
}

void subordinator::ensure(int L, int panels) const {
    {
        std::shared_lock lk(mu_);
        if (levels_[L] && levels_[L]->panels >= panels) return;
    }
    std::unique_lock lk(mu_);
    if (!levels_[L]) {
        levels_[L] = std::make_unique<level_cache>();
        levels_[L]->du = du0 / std::pow(2.0, L);
    }
    level_cache& c = *levels_[L];
    const auto& gl = quad::gauss_legendre(gl_points);
    for (int j = c.panels; j < panels; ++j) {
        const double b = u_hi_ - j * c.du, a = b - c.du;
        for (int q = 0; q < gl_points; ++q) {
            const double u = 0.5 * (a + b) + 0.5 * c.du * gl.nodes[q];
            const double s = std::exp(u);
            const double wq = 0.5 * c.du * gl.weights[q] * w_.w(s) * std::exp(u * (1.0 - p_));
            c.sigma.push_back(s);
            c.wq.push_back(wq);
            c.absw.push_back(std::abs(wq));
        }
    }
    c.panels = std::max(c.panels, panels);
}

cmatrix subordinator::integrate(const std::vector<double>& y, int L, int panels, double* scale, double* wsum) const {
    std::shared_lock lk(mu_);
    const level_cache& c = *levels_[L];
    const std::size_t nn = static_cast<std::size_t>(panels) * gl_points;
    const int N = prof_->N(), n = prof_->n();
    const double inv2b = -1.0 / (2.0 * prof_->b());
    cmatrix acc = cmatrix::Zero(N, N);
    double sc = 0.0;
    if (n == 1) {
        std::vector<double> pts(nn);
        for (std::size_t i = 0; i < nn; ++i) pts[i] = std::pow(c.sigma[i], inv2b) * y[0];
        std::vector<std::vector<cplx>> v;
        prof_->evaluate_1d(pts.data(), nn, v);
        std::vector<double> mag(nn, 0.0);
        for (int e = 0; e < N * N; ++e) {
            cplx s(0.0, 0.0);
            for (std::size_t i = 0; i < nn; ++i) {
                s += c.wq[i] * v[e][i];
                mag[i] = std::max(mag[i], std::abs(v[e][i]));
            }
            acc(e / N, e % N) = s;
        }
        for (std::size_t i = 0; i < nn; ++i) sc += c.absw[i] * mag[i];
    } else {
        for (std::size_t i = 0; i < nn; ++i) {
            const cmatrix z = (*prof_)(scaled(y, std::pow(c.sigma[i], inv2b)));
            acc += c.wq[i] * z;
            sc += c.absw[i] * z.cwiseAbs().maxCoeff();
        }
    }
    *scale = sc;
    double ws = 0.0;
    for (std::size_t i = 0; i < nn; ++i) ws += c.absw[i];
    *wsum = ws;
    return acc;
}

cmatrix subordinator::operator()(const std::vector<double>& y) const {
    const double r = euclid(y);
    const int N = prof_->N();
    double u_lo;
    cmatrix z0;
    if (r > 0.0) {
        const double s_lo = std::pow(r / prof_->cutoff_radius(), 2.0 * prof_->b());
        u_lo = std::log(s_lo);
        if (u_lo >= u_hi_) return cmatrix::Zero(N, N);
    } else {
        if (p_ >= 1.0) throw singular_point("subordination integral diverges at y = 0");
        u_lo = std::log(sigma_zero);
        z0 = (*prof_)(y);
    }
    cmatrix prev;
    double last_diff = 0.0, last_bound = 0.0;
    for (int L = 0; L <= max_level; ++L) {
        const double du = du0 / std::pow(2.0, L);
        const int panels = std::max(1, static_cast<int>(std::ceil((u_hi_ - u_lo) / du - 1e-9)));
        ensure(L, panels);
        double scale = 0.0, wsum = 0.0;
        cmatrix cur;
        if (r > 0.0) {
            cur = integrate(y, L, panels, &scale, &wsum);
        } else {
            // Constant profile value: the weight alone, plus its Taylor integral on (0, s_b).
            const double s_b = std::exp(u_hi_ - panels * du);
            double tot = 0.0, abs_tot = 0.0;
            {
                std::shared_lock lk(mu_);
                const level_cache& c = *levels_[L];
                for (std::size_t i = 0; i < static_cast<std::size_t>(panels) * gl_points; ++i) {
                    tot += c.wq[i];
                    abs_tot += c.absw[i];
                }
            }
            wsum = abs_tot;
            for (std::size_t k = 0; k < w_.taylor.size(); ++k)
                tot += w_.taylor[k] * std::pow(s_b, k + 1.0 - p_) / (k + 1.0 - p_);
            cur = tot * z0;
            scale = abs_tot * z0.cwiseAbs().maxCoeff();
        }
        // Relative to the integrand scale, with a floor at the synthesis roundoff level.
        const double floor = roundoff_floor * prof_->peak() * std::max(wsum, w_ref_);
        last_diff = L > 0 ? (cur - prev).cwiseAbs().maxCoeff() : 0.0;
        last_bound = std::max(tol_ * scale, floor);
        if (L > 0 && last_diff <= last_bound) return cur;
        prev = std::move(cur);
    }
    char msg[160];
    std::snprintf(msg, sizeof msg, "subordination integral did not settle under panel halving at |y| = %.6g "
                  "(last change %.3e, bound %.3e)", r, last_diff, last_bound);
    throw evaluation_failure(msg);
}

// ---------------------------------------------------------------------------------------------

namespace {

class subordination_profile final : public kernel_profile {
public:
    subordination_profile(const constant_operator& op, double alpha, double bml, const multi_index& beta,
                          const kernel_options& opt)
        : sub_(std::make_shared<classical_profile>(op, beta), wright_weight(alpha, bml),
               opt.subordination_tol),
          N_(op.N()) {}

    void evaluate(const std::vector<std::vector<double>>& y, std::vector<cmatrix>& out,
                  std::vector<unsigned char>& singular) const override {
        out.assign(y.size(), cmatrix::Zero(N_, N_));
        singular.assign(y.size(), 0);
        parallel_for(y.size(), [&](std::size_t i) {
            if (euclid(y[i]) == 0.0 && sub_.p() >= 1.0) {
                singular[i] = 1;
                return;
            }
            out[i] = sub_(y[i]);
        });
    }

private:
    subordinator sub_;
    int N_;
};

/// Polynomial-times-exponential representation s^parity * poly(r) * e^{-r}, r = |y|, s = sign(y).
struct signed_poly {
    int parity = 0;
    std::vector<double> c;  // poly coefficients in r, ascending

    void differentiate() {
        std::vector<double> d(c.size(), 0.0);
        for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] += k * c[k];
        for (std::size_t k = 0; k < c.size(); ++k) d[k] -= c[k];
        c = std::move(d);
        parity ^= 1;
    }
    double operator()(double y) const {
        const double r = std::abs(y);
        if (parity == 1 && y == 0.0) return 0.0;
        double v = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) v = v * r + c[k];
        v *= std::exp(-r);
        return (parity == 1 && y < 0.0) ? -v : v;
    }
};

/// (1/2pi) int e^{iy eta} (1+eta^2)^{-m} d eta = e^{-r} P_m(r).
signed_poly matern_transform(int m) {
    signed_poly p;
    p.c.assign(m, 0.0);
    for (int k = 0; k <= m - 1; ++k)
        p.c[m - 1 - k] = factorial(m - 1 + k) / (factorial(k) * factorial(m - 1 - k) * std::pow(2.0, m + k) * factorial(m - 1));
    return p;
}

cplx minus_i_pow(int k) {
    switch (k % 4) {
        case 0: return {1, 0};
        case 1: return {0, -1};
        case 2: return {-1, 0};
        default: return {0, 1};
    }
}

cmatrix ml_of(const specfun::ml_evaluator& ml, const cmatrix& B) {
    if (B.rows() == 1) return cmatrix::Constant(1, 1, ml.scalar(B(0, 0)));
    return ml.matrix(B);
}

/// Fourier route for n = 1: lattice sum of E_{alpha,beta}(a eta^{2b}) minus a Matern compensation,
/// plus the closed-form transform of the compensation.
class fourier_profile_1d final : public kernel_profile {
public:
    fourier_profile_1d(const constant_operator& op, double alpha, double bml, const multi_index& beta,
                       double y_max, const kernel_options& opt)
        : N_(op.N()), b_(op.b()), order_(beta.order()) {
        const auto contour = opt.contour ? *opt.contour : specfun::hankel_contour::standard(alpha);
        contour.validate(alpha);
        const specfun::ml_evaluator ml(alpha, bml, contour);
        require_parabolic(op);
        const cmatrix a = op.coeffs().begin()->second;
        const cmatrix ainv = a.inverse();
        const int mmax = b_ + 3 + (order_ + 1) / 2;
        // C_m = -sum_{k: bk <= m} a^{-k} binom(m-1, m-bk) / Gamma(beta - alpha k)
        C_.assign(mmax + 1, cmatrix::Zero(N_, N_));
        for (int m = b_; m <= mmax; ++m) {
            cmatrix ak = cmatrix::Identity(N_, N_);
            for (int k = 1; b_ * k <= m; ++k) {
                ak = ak * ainv;
                C_[m] -= ak * (binom(m - 1, m - b_ * k) * specfun::rgamma(bml - alpha * k));
            }
        }
        for (int m = 0; m <= mmax; ++m) {
            signed_poly t = matern_transform(std::max(m, 1));
            for (int d = 0; d < order_; ++d) t.differentiate();
            T_.push_back(t);
        }
        const double xi_max = 60.0 * std::max(1.0, std::pow(norm2(ainv), 1.0 / (2 * b_)));
        period_ = 2.0 * y_max + 45.0;
        y_max_ = y_max;
        dxi_ = 2.0 * pi / period_;
        K_ = static_cast<int>(std::ceil(xi_max / dxi_));
        const std::size_t nk = 2 * static_cast<std::size_t>(K_) + 1;
        coeff_.assign(static_cast<std::size_t>(N_ * N_), std::vector<cplx>(nk));
        const double norm = dxi_ / (2.0 * pi);
        // E(a eta^{2b}) is even in eta; evaluate for eta >= 0 and mirror with the parity of eta^beta.
        parallel_for(static_cast<std::size_t>(K_) + 1, [&](std::size_t k) {
            const double eta = k * dxi_;
            cmatrix E;
            if (k == 0)
                E = cmatrix::Identity(N_, N_) * specfun::rgamma(bml);
            else
                E = ml_of(ml, a * std::pow(eta, 2 * b_));
            for (int m = b_; m <= mmax; ++m) E -= C_[m] * std::pow(1.0 + eta * eta, -m);
            const double mono = std::pow(eta, order_);
            const double sgn = (order_ % 2) ? -1.0 : 1.0;
            for (int e = 0; e < N_ * N_; ++e) {
                const cplx v = E(e / N_, e % N_) * norm;
                coeff_[e][K_ + k] = v * mono;
                coeff_[e][K_ - k] = v * mono * sgn;
            }
        });
        mmax_ = mmax;
        phase_ = minus_i_pow(order_);
    }

    void evaluate(const std::vector<std::vector<double>>& y, std::vector<cmatrix>& out,
                  std::vector<unsigned char>& singular) const override {
        const std::size_t np = y.size();
        std::vector<double> pts(np);
        for (std::size_t i = 0; i < np; ++i) {
            if (std::abs(y[i][0]) > y_max_ * (1.0 + 1e-12))
                throw precondition_error("fourier profile: evaluation point beyond the declared y_max");
            pts[i] = y[i][0];
        }
        const std::size_t nk = 2 * static_cast<std::size_t>(K_) + 1;
        std::vector<cplx> r(np);
        out.assign(np, cmatrix::Zero(N_, N_));
        singular.assign(np, 0);
        for (int e = 0; e < N_ * N_; ++e) {
            simd::active().lattice_synthesis(pts.data(), np, -K_ * dxi_, dxi_, coeff_[e].data(), nk, r.data());
            for (std::size_t i = 0; i < np; ++i) out[i](e / N_, e % N_) = r[i];
        }
        for (std::size_t i = 0; i < np; ++i) {
            if (pts[i] == 0.0 && 1 + order_ >= 2 * b_) {
                singular[i] = 1;
                out[i].setZero();
                continue;
            }
            for (int m = b_; m <= mmax_; ++m) out[i] += C_[m] * (phase_ * T_[m](pts[i]));
        }
    }

private:
    int N_, b_, order_, mmax_ = 0, K_ = 0;
    double period_ = 0.0, dxi_ = 0.0, y_max_ = 0.0;
    cplx phase_;
    std::vector<cmatrix> C_;
    std::vector<signed_poly> T_;
    std::vector<std::vector<cplx>> coeff_;
};

/// Fourier route for n >= 2: subtract sum_m c_m (I - A0)^{-m}, add its transform through the
/// elliptic (Laguerre-weighted) subordination integral.
class fourier_profile_nd final : public kernel_profile {
public:
    fourier_profile_nd(const constant_operator& op, double alpha, double bml, const multi_index& beta,
                       double y_max, const kernel_options& opt)
        : n_(op.n()), N_(op.N()), b_(op.b()), order_(beta.order()) {
        const auto contour = opt.contour ? *opt.contour : specfun::hankel_contour::standard(alpha);
        contour.validate(alpha);
        const specfun::ml_evaluator ml(alpha, bml, contour);
        const double delta = require_parabolic(op);
        const int mmax = std::max(1, static_cast<int>(std::ceil((12.0 + n_ + order_) / (2.0 * b_))) - 1);
        std::vector<double> c(mmax);
        for (int m = 1; m <= mmax; ++m) {
            double s = 0.0;
            for (int k = 1; k <= m; ++k) s += ((k % 2) ? -1.0 : 1.0) * binom(m - 1, m - k) * specfun::rgamma(bml - alpha * k);
            c[m - 1] = -s;
        }
        double lam = 0.0;
        for (const auto& eta : sphere_samples(n_, 64)) lam = std::max(lam, norm2(op.symbol(eta)));
        const double kappa = std::sin(pi / (2.0 * b_)) * std::pow(lam, -1.0 / (2 * b_));
        const double xi_max = 10.0 * std::pow(1.0 / delta, 1.0 / (2 * b_));
        period_ = 2.0 * y_max + 45.0 / kappa;
        y_max_ = y_max;
        dxi_ = 2.0 * pi / period_;
        K_ = static_cast<int>(std::ceil(xi_max / dxi_));
        const std::size_t nk = 2 * static_cast<std::size_t>(K_) + 1;
        std::size_t total = 1;
        for (int d = 0; d < n_; ++d) total *= nk;
        coeff_.assign(static_cast<std::size_t>(N_ * N_), std::vector<cplx>(total));
        const double norm = std::pow(dxi_ / (2.0 * pi), n_);
        const cmatrix I = cmatrix::Identity(N_, N_);
        parallel_for(total, [&](std::size_t lin) {
            std::vector<int> k;
            detail::lattice_index(lin, n_, K_, k);
            std::vector<double> eta(n_);
            bool zero = true;
            for (int d = 0; d < n_; ++d) {
                eta[d] = k[d] * dxi_;
                zero = zero && k[d] == 0;
            }
            const cmatrix A = op.symbol(eta);
            cmatrix E = zero ? cmatrix(I * specfun::rgamma(bml)) : ml_of(ml, A);
            Eigen::PartialPivLU<cmatrix> lu(I - A);
            cmatrix R = I;
            for (int m = 1; m <= mmax; ++m) {
                R = lu.solve(R);
                E -= c[m - 1] * R;
            }
            E *= norm * beta.monomial(eta);
            for (int e = 0; e < N_ * N_; ++e) coeff_[e][lin] = E(e / N_, e % N_);
        });
        comp_ = std::make_unique<subordinator>(std::make_shared<classical_profile>(op, beta), laguerre_weight(c),
                                               opt.subordination_tol);
    }

    void evaluate(const std::vector<std::vector<double>>& y, std::vector<cmatrix>& out,
                  std::vector<unsigned char>& singular) const override {
        out.assign(y.size(), cmatrix::Zero(N_, N_));
        singular.assign(y.size(), 0);
        const std::size_t nk = 2 * static_cast<std::size_t>(K_) + 1;
        parallel_for(y.size(), [&](std::size_t i) {
            if (euclid(y[i]) > y_max_ * (1.0 + 1e-12))
                throw precondition_error("fourier profile: evaluation point beyond the declared y_max");
            if (euclid(y[i]) == 0.0 && comp_->p() >= 1.0) {
                singular[i] = 1;
                return;
            }
            std::vector<std::vector<double>> axes(n_);
            for (int d = 0; d < n_; ++d) axes[d] = {y[i][d]};
            std::vector<cplx> r;
            cmatrix v(N_, N_);
            for (int e = 0; e < N_ * N_; ++e) {
                detail::tensor_synthesis(coeff_[e], n_, nk, -K_ * dxi_, dxi_, axes, r);
                v(e / N_, e % N_) = r[0];
            }
            out[i] = v + (*comp_)(y[i]);
        });
    }

private:
    int n_, N_, b_, order_, K_ = 0;
    double period_ = 0.0, dxi_ = 0.0, y_max_ = 0.0;
    std::vector<std::vector<cplx>> coeff_;
    std::unique_ptr<subordinator> comp_;
};

multi_index normalized_beta(const constant_operator& op, const multi_index& beta) {
    if (beta.dim() == 0) return multi_index(std::vector<int>(op.n(), 0));
    if (beta.dim() != op.n()) throw precondition_error("derivative multi-index has wrong dimension");
    return beta;
}

}  // namespace

std::unique_ptr<kernel_profile> make_subordination_profile(const constant_operator& op, double alpha,
                                                           double ml_beta, const multi_index& beta,
                                                           const kernel_options& opt) {
    fractional_order a(alpha);
    if (!(ml_beta >= 0.0)) throw precondition_error("kernel profile: ml_beta must be nonnegative");
    return std::make_unique<subordination_profile>(op, alpha, ml_beta, normalized_beta(op, beta), opt);
}

std::unique_ptr<kernel_profile> make_subordination_profile(const constant_operator& op, double alpha,
                                                           field_kind kind, const multi_index& beta,
                                                           const kernel_options& opt) {
    return make_subordination_profile(op, alpha, kind_ml_beta(kind, alpha), beta, opt);
}

std::unique_ptr<kernel_profile> make_fourier_profile(const constant_operator& op, double alpha, double ml_beta,
                                                     const multi_index& beta, double y_max,
                                                     const kernel_options& opt) {
    fractional_order a(alpha);
    if (!(y_max >= 0.0)) throw precondition_error("fourier profile: y_max must be nonnegative");
    if (!(ml_beta >= 0.0)) throw precondition_error("kernel profile: ml_beta must be nonnegative");
    const multi_index bt = normalized_beta(op, beta);
    if (op.n() == 1) return std::make_unique<fourier_profile_1d>(op, alpha, ml_beta, bt, y_max, opt);
    return std::make_unique<fourier_profile_nd>(op, alpha, ml_beta, bt, y_max, opt);
}

std::unique_ptr<kernel_profile> make_fourier_profile(const constant_operator& op, double alpha, field_kind kind,
                                                     const multi_index& beta, double y_max,
                                                     const kernel_options& opt) {
    return make_fourier_profile(op, alpha, kind_ml_beta(kind, alpha), beta, y_max, opt);
}

kernel_field fractional_kernel(const constant_operator& op, double alpha, field_kind kind,
                               const std::vector<double>& times, const grid_spec& grid, kernel_route route,
                               const multi_index& beta_in, const kernel_options& opt) {
    fractional_order a(alpha);
    grid.validate();
    if (grid.n != op.n()) throw config_error("kernel: grid dimension differs from operator dimension");
    if (times.empty()) throw precondition_error("kernel: no times requested");
    for (double t : times)
        if (!(t > 0.0)) throw precondition_error("kernel: times must be positive");
    const multi_index beta = normalized_beta(op, beta_in);
    if ((kind == field_kind::Y_alpha_int1 || kind == field_kind::Y_alpha_int2) && route != kernel_route::fourier)
        throw unsupported_region("kernel: time-integrated kinds are computed on the Fourier route only");
    if (kind == field_kind::Z) {
        kernel_field f;
        for (std::size_t i = 0; i < times.size(); ++i) {
            auto s = classical_fscp(op, times[i], grid, beta);
            if (i == 0) {
                f = std::move(s);
                f.times = times;
            } else {
                f.values.insert(f.values.end(), s.values.begin(), s.values.end());
                f.singular.insert(f.singular.end(), s.singular.begin(), s.singular.end());
            }
        }
        return f;
    }
    const int n = op.n(), b = op.b();
    const double tmin = *std::min_element(times.begin(), times.end());
    const double xmax = grid.half_width * std::sqrt(static_cast<double>(n));
    const double ymax = std::pow(tmin, -alpha / (2.0 * b)) * xmax;
    auto profile = route == kernel_route::subordination ? make_subordination_profile(op, alpha, kind, beta, opt)
                                                        : make_fourier_profile(op, alpha, kind, beta, ymax, opt);
    kernel_field f;
    f.grid = grid;
    f.times = times;
    f.kind = kind;
    f.derivative = beta;
    f.N = op.N();
    const std::size_t P = grid.size();
    std::vector<std::vector<double>> ys(P * times.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const double c = std::pow(times[ti], -alpha / (2.0 * b));
        for (std::size_t p = 0; p < P; ++p) ys[ti * P + p] = scaled(grid.point(p), c);
    }
    profile->evaluate(ys, f.values, f.singular);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const double s = std::pow(times[ti], kind_time_exponent(kind, alpha, n, b, beta.order()));
        for (std::size_t p = 0; p < P; ++p) f.values[ti * P + p] *= s;
    }
    for (const auto& v : f.values) require_finite(v, "kernel value");
    return f;
}

kernel_field fractional_fscp_subordination(const constant_operator& op, double alpha, double t, const grid_spec& grid) {
    return fractional_kernel(op, alpha, field_kind::Z_alpha, {t}, grid, kernel_route::subordination);
}

kernel_field fractional_fscp_fourier(const constant_operator& op, double alpha, double t, const grid_spec& grid,
                                     const specfun::hankel_contour& contour) {
    kernel_options opt;
    opt.contour = contour;
    return fractional_kernel(op, alpha, field_kind::Z_alpha, {t}, grid, kernel_route::fourier, {}, opt);
}

kernel_field y_kernel(const constant_operator& op, double alpha, double t, const grid_spec& grid, kernel_route route) {
    return fractional_kernel(op, alpha, field_kind::Y_alpha, {t}, grid, route);
}

kernel_field dt_z_kernel(const constant_operator& op, double alpha, double t, const grid_spec& grid) {
    return fractional_kernel(op, alpha, field_kind::dtZ_alpha, {t}, grid, kernel_route::subordination);
}

cmatrix elliptic_green(const constant_operator& op, const std::vector<double>& x, const multi_index& beta) {
    if (static_cast<int>(x.size()) != op.n()) throw precondition_error("elliptic_green: x has wrong dimension");
    if (euclid(x) == 0.0) throw singular_point("elliptic_green: x = 0 is the singular point");
    subordinator s(std::make_shared<classical_profile>(op, normalized_beta(op, beta)), laguerre_weight({1.0}));
    return s(x);
}

cmatrix spatial_integral(const kernel_field& f, std::size_t ti) {
    const grid_spec& g = f.grid;
    const int M = g.points_per_axis, half = M / 2;
    const double h = g.spacing();
    std::vector<double> w(M, h);
    if (f.kind != field_kind::Z) {
        // Fractional kernels have a cusp at x = 0: Gregory rule on each side of it.
        const int order = std::max(2, std::min(8, (half - 1) / 2));
        const auto wl = quad::gregory_weights(half, h, order);      // indices 0..half
        const auto wr = quad::gregory_weights(half - 1, h, order);  // indices half..M-1
        std::fill(w.begin(), w.end(), 0.0);
        for (int i = 0; i <= half; ++i) w[i] += wl[i];
        for (int i = half; i < M; ++i) w[i] += wr[i - half];
    }
    cmatrix acc = cmatrix::Zero(f.N, f.N);
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (f.singular[f.index(ti, p)]) continue;
        double wt = 1.0;
        for (int idx : g.unravel(p)) wt *= w[idx];
        acc += wt * f.at(ti, p);
    }
    return acc;
}

}  // namespace fracpar
