#include "fracpar/matrix_tools.hpp"

#include <cmath>

#include "fracpar/error.hpp"

namespace fracpar {

double dissipativity_constant(const cmatrix& B) {
    const cmatrix H = 0.5 * (B + B.adjoint());
    Eigen::SelfAdjointEigenSolver<cmatrix> es(H, Eigen::EigenvaluesOnly);
    return -es.eigenvalues().maxCoeff();
}

double norm2(const cmatrix& B) {
    if (B.size() == 0) return 0.0;
    if (B.rows() == 1 && B.cols() == 1) return std::abs(B(0, 0));
    Eigen::JacobiSVD<cmatrix> svd(B);
    return svd.singularValues()(0);
}

cmatrix expm(const cmatrix& A) {
    const Eigen::Index n = A.rows();
    if (n == 1) return cmatrix::Constant(1, 1, std::exp(A(0, 0)));
    const double nrm = A.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    const cmatrix X = A / std::ldexp(1.0, s);
    // Pade (6,6) coefficients c_k = (12-k)! 6! / (12! k! (6-k)!)
    static const double c[] = {1.0, 0.5, 5.0 / 44, 1.0 / 66, 1.0 / 792, 1.0 / 15840,
                               1.0 / 665280};
    const cmatrix I = cmatrix::Identity(n, n);
    cmatrix Xk = I;
    cmatrix num = I, den = I;
    for (int k = 1; k <= 6; ++k) {
        Xk = Xk * X;
        num += c[k] * Xk;
        den += ((k % 2) ? -c[k] : c[k]) * Xk;
    }
    cmatrix E = den.partialPivLu().solve(num);
    for (int i = 0; i < s; ++i) E = E * E;
    return E;
}

void require_finite(const cmatrix& B, const char* what) {
    if (!B.allFinite()) throw config_error(std::string(what) + ": non-finite matrix entry");
}

}  // namespace fracpar
