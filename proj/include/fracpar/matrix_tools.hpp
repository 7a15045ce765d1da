#pragma once

#include "fracpar/types.hpp"

namespace fracpar {

/// Best delta in Re<Bz,z> <= -delta|z|^2, i.e. minus the top eigenvalue of (B+B*)/2.
/// A negative value means B is not dissipative.
double dissipativity_constant(const cmatrix& B);

/// Operator 2-norm (largest singular value).
double norm2(const cmatrix& B);

/// Matrix exponential by scaling and squaring around a (6,6) Pade core.
cmatrix expm(const cmatrix& A);

/// Throws config_error when any entry is not finite.
void require_finite(const cmatrix& B, const char* what);

}  // namespace fracpar
