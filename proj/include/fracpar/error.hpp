#pragma once

#include <stdexcept>
#include <string>

namespace fracpar {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user configuration (bad JSON, out-of-range parameter, contour invariant broken).
class config_error : public error {
public:
    using error::error;
};

/// A documented precondition of an operation does not hold.
class precondition_error : public error {
public:
    using error::error;
};

/// Operator fails the strong parabolicity check.
class parabolicity_error : public config_error {
public:
    explicit parabolicity_error(const std::string& what, double delta)
        : config_error(what), delta_(delta) {}
    double delta() const noexcept { return delta_; }

private:
    double delta_;
};

/// A series, quadrature or refinement loop failed to converge.
class evaluation_failure : public error {
public:
    using error::error;
};

/// Argument outside the region the evaluator supports.
class unsupported_region : public error {
public:
    using error::error;
};

/// Point where the requested quantity is singular (x = 0, x = xi).
class singular_point : public error {
public:
    using error::error;
};

/// Finite-difference stencil reaches outside a non-periodic grid.
class domain_boundary_error : public error {
public:
    using error::error;
};

/// Too few admissible samples for a certification.
class insufficient_data : public error {
public:
    using error::error;
};

/// Lattice cutoff too small for the requested kernel; carries the cutoff that would suffice.
class cutoff_refusal : public precondition_error {
public:
    cutoff_refusal(const std::string& what, double required_cutoff)
        : precondition_error(what), required_(required_cutoff) {}
    double required_cutoff() const noexcept { return required_; }

private:
    double required_;
};

/// Successive substitution growing instead of contracting.
class divergence_error : public error {
public:
    divergence_error(const std::string& what, double norm) : error(what), norm_(norm) {}
    double norm() const noexcept { return norm_; }

private:
    double norm_;
};

/// Linear solve failed or was too ill conditioned.
class conditioning_error : public error {
public:
    using error::error;
};

}  // namespace fracpar
