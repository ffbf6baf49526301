#pragma once

#include <functional>

namespace einglue {

// Adaptive Gauss-Kronrod integration of fn over [a, b] to relative tolerance
// rel_tol. Throws std::runtime_error when the error estimate does not reach
// the requested tolerance.
double integrate(const std::function<double(double)>& fn, double a, double b,
                 double rel_tol = 1e-10);

}  // namespace einglue
