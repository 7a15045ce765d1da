#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace fracpar {

using cplx = std::complex<double>;
using cmatrix = Eigen::MatrixXcd;
using cvector = Eigen::VectorXcd;
using rvector = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;

/// Fractional order alpha in (0,1).
class fractional_order {
public:
    explicit fractional_order(double alpha);
    double value() const noexcept { return alpha_; }
    operator double() const noexcept { return alpha_; }

private:
    double alpha_;
};

}  // namespace fracpar
