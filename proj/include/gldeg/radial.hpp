#pragma once

#include <vector>

namespace gldeg {

// Modulus profile of the radial Ginzburg-Landau state u = f(r) e^{i d phi}:
//   f'' + f'/r - d^2 f / r^2 + f (1 - f^2) / eps^2 = 0
// solved by finite-difference Newton iteration with Dirichlet data at both
// ends. Evaluation uses cubic Hermite interpolation (nodal derivatives from
// five-point differences).
struct RadialProfile {
    double a = 0.0, b = 1.0;
    std::vector<double> f;  // nodal values, uniform grid
    std::vector<double> fp; // nodal derivatives

    double eval(double r) const;
    double deriv(double r) const;
};

RadialProfile solve_radial_profile(double a, double b, double fa, double fb, int d,
                                   double eps, int n = 8192);

// Max-norm of the ODE residual at interior nodes, for refinement tests.
double radial_residual(const RadialProfile& p, int d, double eps);

} // namespace gldeg
