#include "fracpar/oracle.hpp"

#include <cmath>

#include <Eigen/LU>

#include "fracpar/error.hpp"
#include "fracpar/matrix_tools.hpp"
#include "fracpar/specfun.hpp"

namespace fracpar {

namespace {

/// L1 sum for t^sigma at step k in units dt = 1.
double l1_power(const std::vector<double>& w, double sigma, int k) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += w[j] * (std::pow(k - j, sigma) - std::pow(k - j - 1, sigma));
    return s;
}

}  // namespace

stepping_scheme stepping_scheme::make(double alpha, double dt, int step_count, bool corrected) {
    fractional_order a(alpha);
    if (!(dt > 0.0) || step_count < 1) throw precondition_error("stepping_scheme: dt > 0 and step_count >= 1 required");
    stepping_scheme s;
    s.alpha = alpha;
    s.dt = dt;
    s.step_count = step_count;
    s.weights.resize(step_count);
    const double g = specfun::rgamma(2.0 - alpha);
    for (int j = 0; j < step_count; ++j)
        s.weights[j] = (std::pow(j + 1.0, 1.0 - alpha) - std::pow(static_cast<double>(j), 1.0 - alpha)) * g;
    if (!corrected) return s;
    for (int j = 1; j * alpha < 2.0 - alpha; ++j) {
        const double sg = j * alpha;
        if (std::abs(sg - std::round(sg)) > 1e-12) s.sigmas.push_back(sg);
    }
    const int M = static_cast<int>(s.sigmas.size());
    if (M == 0) return s;
    if (step_count < M) throw precondition_error("stepping_scheme: fewer steps than starting corrections");
    Eigen::MatrixXd V(M, M);
    for (int r = 0; r < M; ++r)
        for (int m = 1; m <= M; ++m) V(r, m - 1) = std::pow(m, s.sigmas[r]);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    s.corrections.assign(step_count, std::vector<double>(M));
    for (int k = 1; k <= step_count; ++k) {
        Eigen::VectorXd e(M);
        for (int r = 0; r < M; ++r) {
            const double sg = s.sigmas[r];
            const double exact = std::tgamma(sg + 1.0) / std::tgamma(sg + 1.0 - alpha) * std::pow(k, sg - alpha);
            e(r) = exact - l1_power(s.weights, sg, k);
        }
        const Eigen::VectorXd w = lu.solve(e);
        for (int m = 0; m < M; ++m) s.corrections[k - 1][m] = w(m);
    }
    return s;
}

double caputo_l1(const std::vector<double>& u, const stepping_scheme& s) {
    if (u.size() < 2) throw precondition_error("caputo_l1: history needs at least two values");
    const int k = static_cast<int>(u.size()) - 1;
    if (k > s.step_count) throw precondition_error("caputo_l1: history longer than the scheme");
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += s.weights[j] * (u[k - j] - u[k - j - 1]);
    return acc * std::pow(s.dt, -s.alpha);
}

double caputo_corrected(const std::vector<double>& u, const stepping_scheme& s) {
    double v = caputo_l1(u, s);
    const int k = static_cast<int>(u.size()) - 1;
    const int M = static_cast<int>(s.sigmas.size());
    if (M > k) throw precondition_error("caputo_corrected: history shorter than the starting corrections");
    double corr = 0.0;
    for (int m = 1; m <= M; ++m) corr += s.corrections[k - 1][m - 1] * (u[m] - u[0]);
    return v + corr * std::pow(s.dt, -s.alpha);
}

std::vector<cvector> solve_linear_fode(const cmatrix& A, const cvector& u0, const source_fn& f,
                                       const stepping_scheme& s) {
    const Eigen::Index d = A.rows();
    if (A.cols() != d || u0.size() != d) throw precondition_error("solve_linear_fode: dimension mismatch");
    require_finite(A, "solve_linear_fode: operator");
    const int K = s.step_count;
    const int M = static_cast<int>(s.sigmas.size());
    const double c = std::pow(s.dt, -s.alpha);
    const auto& w = s.weights;
    auto W = [&](int k, int m) { return s.corrections[k - 1][m - 1]; };
    // Coefficient of U_i in the L1 sum at step k.
    auto L = [&](int k, int i) {
        if (i == k) return w[0];
        if (i == 0) return -w[k - 1];
        return w[k - i] - w[k - i - 1];
    };
    auto source = [&](int k) -> cvector {
        if (!f) return cvector::Zero(d);
        cvector v = f(k * s.dt);
        if (v.size() != d) throw precondition_error("solve_linear_fode: source has the wrong size");
        return v;
    };
    auto check_lu = [&](const Eigen::PartialPivLU<cmatrix>& lu, const char* what) {
        const double rc = lu.rcond();
        if (!(rc > 1e-14))
            throw conditioning_error(std::string("solve_linear_fode: ") + what + " is singular (rcond " +
                                     std::to_string(rc) + ")");
    };

    std::vector<cvector> U(K + 1);
    U[0] = u0;
    if (M > 0) {
        // Steps 1..M are coupled through the corrections and solved as one block.
        cmatrix B = cmatrix::Zero(M * d, M * d);
        cvector rhs(M * d);
        for (int k = 1; k <= M; ++k) {
            for (int i = 1; i <= M; ++i) {
                double coef = W(k, i) + (i <= k ? L(k, i) : 0.0);
                B.block((k - 1) * d, (i - 1) * d, d, d) += cmatrix::Identity(d, d) * (c * coef);
            }
            B.block((k - 1) * d, (k - 1) * d, d, d) -= A;
            double c0 = L(k, 0);
            for (int m = 1; m <= M; ++m) c0 -= W(k, m);
            rhs.segment((k - 1) * d, d) = source(k) - (c * c0) * u0;
        }
        const Eigen::PartialPivLU<cmatrix> lu(B);
        check_lu(lu, "starting block");
        const cvector sol = lu.solve(rhs);
        for (int k = 1; k <= M; ++k) U[k] = sol.segment((k - 1) * d, d);
    }
    if (K > M) {
        const cmatrix S = cmatrix::Identity(d, d) * (c * w[0]) - A;
        const Eigen::PartialPivLU<cmatrix> lu(S);
        check_lu(lu, "step matrix");
        cvector hist(d);
        for (int k = M + 1; k <= K; ++k) {
            hist.setZero();
            for (int i = 0; i < k; ++i) hist += L(k, i) * U[i];
            for (int m = 1; m <= M; ++m) hist += W(k, m) * (U[m] - u0);
            U[k] = lu.solve(source(k) - c * hist);
        }
    }
    for (const auto& u : U)
        if (!u.allFinite()) throw conditioning_error("solve_linear_fode: non-finite solution");
    return U;
}

sampled_field sample_field(const grid_spec& grid, int N, const std::function<cvector(const std::vector<double>&)>& u) {
    sampled_field v(N, grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const cvector x = u(grid.point(p));
        if (x.size() != N) throw precondition_error("sample_field: function returned the wrong size");
        v.col(p) = x;
    }
    return v;
}

trajectory solve_ivp(const variable_system& sys, const sampled_field& u0, const field_source_fn& f, double T,
                     int steps, const grid_spec& grid, double alpha, bool corrected) {
    sys.validate();
    grid.validate();
    if (!(T > 0.0) || steps < 1) throw precondition_error("solve_ivp: T > 0 and steps >= 1 required");
    if (u0.rows() != sys.N || u0.cols() != static_cast<Eigen::Index>(grid.size()))
        throw precondition_error("solve_ivp: initial data does not match the grid");
    const fd_operator op(sys, part_selector::full(), grid, boundary_mode::periodic);
    const cmatrix A = op.assemble();
    const auto scheme = stepping_scheme::make(alpha, T / steps, steps, corrected);
    const cvector v0 = Eigen::Map<const cvector>(u0.data(), u0.size());
    source_fn src;
    if (f) {
        src = [&](double t) {
            cvector v(u0.size());
            for (std::size_t p = 0; p < grid.size(); ++p) v.segment(p * sys.N, sys.N) = f(t, grid.point(p));
            return v;
        };
    }
    const auto U = solve_linear_fode(A, v0, src, scheme);
    trajectory tr;
    tr.grid = grid;
    tr.N = sys.N;
    tr.alpha = alpha;
    tr.dt = scheme.dt;
    tr.corrected = corrected;
    for (int k = 0; k <= steps; ++k) {
        tr.times.push_back(k * scheme.dt);
        tr.values.push_back(Eigen::Map<const cmatrix>(U[k].data(), sys.N, grid.size()));
    }
    return tr;
}

std::vector<double> observed_orders(const std::vector<double>& e) {
    std::vector<double> r;
    for (std::size_t i = 1; i < e.size(); ++i) r.push_back(std::log2(e[i - 1] / e[i]));
    return r;
}

}  // namespace fracpar
