#include <cmath>
#include <limits>

#include "fracpar/error.hpp"
#include "fracpar/matrix_tools.hpp"
#include "fracpar/quadrature.hpp"
#include "fracpar/specfun.hpp"

namespace fracpar::specfun {

namespace {

constexpr int max_level = 5;
constexpr double doubling_tol = 1e-10;
constexpr double roundoff_floor = 1e-13;
// |e^{eta^{1/alpha}}| below this ends a ray.
constexpr double ray_cut = 1e-18;

}  // namespace

hankel_contour hankel_contour::standard(double alpha) {
    hankel_contour c;
    c.radius = 1.0;
    c.angle = 0.5 * (pi * alpha / 2.0 + std::min(pi / 2.0, pi * alpha));
    return c;
}

void hankel_contour::validate(double alpha) const {
    if (!(radius > 0.0)) throw config_error("hankel contour: radius must be positive");
    const double lo = pi * alpha / 2.0, hi = std::min(pi / 2.0, pi * alpha);
    if (!(angle > lo && angle < hi))
        throw config_error("hankel contour: angle outside (pi*alpha/2, min(pi/2, pi*alpha))");
    if (nodes_per_ray < 8 || nodes_on_arc < 8)
        throw config_error("hankel contour: node counts must be at least 8");
}

double family_beta(double alpha, ml_family family) {
    switch (family) {
        case ml_family::one: return 1.0;
        case ml_family::alpha: return alpha;
        case ml_family::zero: return 0.0;
    }
    return 1.0;
}

contour_rule make_contour_rule(double alpha, double beta, const hankel_contour& c, int level) {
    const int nr = c.nodes_per_ray << level;
    const int na = c.nodes_on_arc << level;
    const double inv_a = 1.0 / alpha;
    const double wexp = (1.0 - beta) / alpha;
    const cplx pref = -1.0 / (cplx(0.0, 2.0 * pi) * alpha);
    auto integrand = [&](cplx eta) { return pref * std::exp(std::pow(eta, inv_a)) * std::pow(eta, wexp); };

    contour_rule r;
    const double decay = -std::cos(c.angle / alpha);
    const double rho_max =
        std::max(std::pow(std::log(1.0 / ray_cut) / decay, alpha), 2.0 * c.radius);
    const int per_panel = 8;
    const int panels = std::max(1, nr / per_panel);
    const double ratio = std::pow(rho_max / c.radius, 1.0 / panels);
    for (int sgn : {-1, 1}) {
        const cplx dir = std::polar(1.0, sgn * c.angle);
        double a = c.radius;
        for (int p = 0; p < panels; ++p) {
            const double b = a * ratio;
            const quad::rule g = quad::gauss_legendre(per_panel, a, b);
            for (int i = 0; i < per_panel; ++i) {
                const cplx eta = g.nodes[i] * dir;
                // incoming on the lower ray, outgoing on the upper ray
                r.eta.push_back(eta);
                r.coef.push_back(integrand(eta) * dir * (sgn * g.weights[i]));
            }
            a = b;
        }
    }
    const quad::rule g = quad::gauss_legendre(na, -c.angle, c.angle);
    for (int i = 0; i < na; ++i) {
        const cplx eta = std::polar(c.radius, g.nodes[i]);
        r.eta.push_back(eta);
        r.coef.push_back(integrand(eta) * cplx(0.0, 1.0) * eta * g.weights[i]);
    }
    return r;
}

ml_evaluator::ml_evaluator(double alpha, double beta, hankel_contour contour)
    : alpha_(alpha), beta_(beta), contour_(contour) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("mittag-leffler: alpha outside (0,1)");
    contour_.validate(alpha);
    for (int l = 0; l <= max_level; ++l) rules_.push_back(make_contour_rule(alpha, beta, contour_, l));
}

ml_evaluator::ml_evaluator(double alpha, double beta)
    : ml_evaluator(alpha, beta, hankel_contour::standard(alpha)) {}

cplx ml_series(double alpha, double beta, cplx z, bool* ok) {
    if (z == cplx(0.0)) {
        if (ok) *ok = true;
        return rgamma(beta);
    }
    const double lz = std::log(std::abs(z));
    cplx sum = 0.0, zk = 1.0;
    double max_term = 0.0, prev_env = std::numeric_limits<double>::infinity();
    bool good = true;
    for (int k = 0;; ++k) {
        if (k > 4000) {
            good = false;
            break;
        }
        const double x = alpha * k + beta;
        const cplx term = zk * rgamma(x);
        sum += term;
        max_term = std::max(max_term, std::abs(term));
        const double env = (x > 0) ? std::exp(k * lz - std::lgamma(x)) : std::abs(term);
        if (env > 1e300) {
            good = false;
            break;
        }
        if (k > 2 && env <= prev_env && env <= 1e-17 * std::max(std::abs(sum), 1e-300)) break;
        prev_env = env;
        zk *= z;
    }
    if (good && max_term > 1e4 * std::abs(sum)) good = false;
    if (ok) *ok = good;
    return sum;
}

cmatrix ml_series_matrix(double alpha, double beta, const cmatrix& B) {
    const Eigen::Index n = B.rows();
    cmatrix sum = cmatrix::Zero(n, n);
    cmatrix Bk = cmatrix::Identity(n, n);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4000; ++k) {
        const cmatrix term = Bk * rgamma(alpha * k + beta);
        sum += term;
        const double tn = Bk.norm() * std::abs(rgamma(alpha * k + beta));
        if (k > 2 && tn < prev && tn <= 1e-18 * std::max(sum.norm(), 1e-300)) return sum;
        prev = (tn > 0) ? tn : prev;
        Bk = Bk * B;
        if (!Bk.allFinite()) break;
    }
    throw evaluation_failure("matrix Mittag-Leffler series did not settle");
}

cplx ml_evaluator::contour_scalar(cplx z, int level) const {
    const contour_rule& r = rules_[level];
    cplx s = 0.0;
    for (std::size_t j = 0; j < r.eta.size(); ++j) s += r.coef[j] / (z - r.eta[j]);
    return s;
}

cplx ml_evaluator::scalar(cplx z) const {
    const double az = std::abs(z);
    if (az <= std::min(1.0, contour_.radius)) return ml_series(alpha_, beta_, z);
    if (std::abs(std::arg(z)) <= contour_.angle + 1e-3) {
        bool ok = false;
        const cplx s = ml_series(alpha_, beta_, z, &ok);
        if (ok) return s;
        throw unsupported_region("mittag-leffler: argument beyond series reach in the right half-plane");
    }
    cplx prev = contour_scalar(z, 0);
    for (int l = 1; l <= max_level; ++l) {
        const cplx cur = contour_scalar(z, l);
        double scale = 0.0;
        for (std::size_t j = 0; j < rules_[l].eta.size(); ++j)
            scale += std::abs(rules_[l].coef[j] / (z - rules_[l].eta[j]));
        const double d = std::abs(cur - prev);
        if (d <= doubling_tol * std::abs(cur) || d <= roundoff_floor * scale) return cur;
        prev = cur;
    }
    throw evaluation_failure("mittag-leffler: contour quadrature did not settle under node doubling");
}

cmatrix ml_evaluator::contour_matrix(const cmatrix& B, int level, double* scale) const {
    const contour_rule& r = rules_[level];
    const Eigen::Index n = B.rows();
    cmatrix sum = cmatrix::Zero(n, n);
    const cmatrix I = cmatrix::Identity(n, n);
    double sc = 0.0;
    for (std::size_t j = 0; j < r.eta.size(); ++j) {
        cmatrix M = B;
        M.diagonal().array() -= r.eta[j];
        const cmatrix R = M.partialPivLu().solve(I);
        sum += r.coef[j] * R;
        sc += std::abs(r.coef[j]) * R.cwiseAbs().maxCoeff();
    }
    if (scale) *scale = sc;
    return sum;
}

cmatrix ml_evaluator::matrix(const cmatrix& B) const {
    if (B.rows() == 1) return cmatrix::Constant(1, 1, scalar(B(0, 0)));
    cmatrix prev = contour_matrix(B, 0, nullptr);
    for (int l = 1; l <= max_level; ++l) {
        double scale = 0.0;
        const cmatrix cur = contour_matrix(B, l, &scale);
        const double d = (cur - prev).cwiseAbs().maxCoeff();
        if (d <= doubling_tol * cur.cwiseAbs().maxCoeff() || d <= roundoff_floor * scale) return cur;
        prev = cur;
    }
    throw evaluation_failure("mittag-leffler: matrix contour quadrature did not settle");
}

cplx mittag_leffler_scalar(double alpha, double beta, cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw precondition_error("mittag-leffler: non-finite argument");
    const ml_evaluator ev(alpha, beta);
    return ev.scalar(z);
}

cplx mittag_leffler_scalar(double alpha, ml_family family, cplx z) {
    return mittag_leffler_scalar(alpha, family_beta(alpha, family), z);
}

cmatrix mittag_leffler_matrix(double alpha, ml_family family, const cmatrix& B,
                              const hankel_contour& contour) {
    require_finite(B, "mittag_leffler_matrix");
    contour.validate(alpha);
    if (!(dissipativity_constant(B) > 0.0))
        throw precondition_error("mittag_leffler_matrix: matrix is not dissipative");
    const ml_evaluator ev(alpha, family_beta(alpha, family), contour);
    return ev.matrix(B);
}

cmatrix mittag_leffler_matrix(double alpha, ml_family family, const cmatrix& B) {
    return mittag_leffler_matrix(alpha, family, B, hankel_contour::standard(alpha));
}

}  // namespace fracpar::specfun
