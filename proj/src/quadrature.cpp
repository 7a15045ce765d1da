#include "fracpar/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "fracpar/types.hpp"

namespace fracpar::quad {

namespace {

rule build_gauss_legendre(int n) {
    rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = x;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

}  // namespace

const rule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    static std::mutex mu;
    static std::map<int, rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
    return it->second;
}

rule gauss_legendre(int n, double a, double b) {
    const rule& ref = gauss_legendre(n);
    rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = mid + half * ref.nodes[i];
        r.weights[i] = half * ref.weights[i];
    }
    return r;
}

rule composite_gauss_legendre(int n, int panels, double a, double b) {
    rule r;
    r.nodes.reserve(static_cast<std::size_t>(n) * panels);
    r.weights.reserve(static_cast<std::size_t>(n) * panels);
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        rule g = gauss_legendre(n, a + p * w, a + (p + 1) * w);
        r.nodes.insert(r.nodes.end(), g.nodes.begin(), g.nodes.end());
        r.weights.insert(r.weights.end(), g.weights.begin(), g.weights.end());
    }
    return r;
}

std::vector<double> gregory_weights(std::size_t m, double h, int order) {
    if (order < 2 || order > 8) throw std::invalid_argument("gregory_weights: order in 2..8");
    const int p = order - 1;  // number of correction terms
    if (m < static_cast<std::size_t>(2 * p + 2))
        throw std::invalid_argument("gregory_weights: too few samples for the requested order");
    // Gregory coefficients for the forward/backward difference corrections.
    static const double g[] = {1.0 / 12, 1.0 / 24, 19.0 / 720, 3.0 / 160,
                               863.0 / 60480, 275.0 / 24192, 33953.0 / 3628800};
    std::vector<double> w(m + 1, h);
    w[0] = w[m] = 0.5 * h;
    // Term j of Gregory's formula is -h g_j (nabla^j f_m + (-1)^j Delta^j f_0),
    // which puts -h g_j (-1)^i C(j,i) on sample i from either end.
    for (int j = 1; j <= p; ++j) {
        double binom = 1.0;
        for (int i = 0; i <= j; ++i) {
            if (i > 0) binom = binom * (j - i + 1) / i;
            const double c = -h * g[j - 1] * ((i % 2 == 0) ? 1.0 : -1.0) * binom;
            w[i] += c;
            w[m - i] += c;
        }
    }
    return w;
}

}  // namespace fracpar::quad
