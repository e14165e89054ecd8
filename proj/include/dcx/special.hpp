#pragma once

#include <functional>

namespace dcx {

// Principal-branch Lambert W via Halley iteration; argument must be > -1/e.
double lambert_w(double z);

// E1(x) = \int_x^\infty e^{-t}/t dt, x > 0.
double expint1(double x);

// Adaptive Simpson quadrature.  Throws DomainFault on non-convergence.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol);

}  // namespace dcx
