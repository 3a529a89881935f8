#pragma once

#include <utility>
#include <vector>

#include "gldeg/radial.hpp"
#include "gldeg/vec2.hpp"

namespace gldeg {

// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

// Analytic field on an annulus in polar coordinates.
struct PolarFn {
    virtual cplx value(double r, double phi) const = 0;
    virtual cplx d_r(double r, double phi) const = 0;
    virtual cplx d_phi(double r, double phi) const = 0;
    virtual ~PolarFn() = default;
};

struct SplitCheck {
    double lhs = 0.0;   // E_eps(rho w)
    double e_u = 0.0;   // E_eps(u)
    double l_w = 0.0;   // L_eps(w)
    double rhs = 0.0;   // e_u + l_w
};

// Energy splitting check on the sub-annulus [ra, rb] for the radial state
// u = f(r) e^{i d phi}. Both sides use the same Gauss(r) x trapezoid(phi)
// tensor quadrature, so the discrepancy measures only the failure of u to
// solve the polar Euler-Lagrange system (the ODE solve makes that tiny).
SplitCheck energy_split_check(const RadialProfile& f, int d, double eps, double ra, double rb,
                              const PolarFn& w, int nr = 64, int nphi = 512);

// Analytic field on the (theta, h) chart rectangle.
struct ChartField {
    virtual cplx value(double theta, double h) const = 0;
    virtual cplx d_theta(double theta, double h) const = 0;
    virtual cplx d_h(double theta, double h) const = 0;
    virtual ~ChartField() = default;
};

// (1/2) integral over (-2delta,2delta)x(1-delta,1) of
//   |d_h w|^2 + |d_theta w|^2 - |w|^2 + lambda |e^{i theta} - w|^2
// in chart coordinates (the chart Jacobian absorbs rho^2 |grad theta|^2).
// Tensor Gauss quadrature with theta panels split at +-delta.
double M_lambda_chart(const ChartField& w, double delta, double lambda, int n_theta = 64,
                      int n_h = 64);

// Same functional with the pointwise modulus clamp min(|w|,2)/|w| applied to
// the field; derivatives of the clamped field by central differences.
double M_lambda_chart_clamped(const ChartField& w, double delta, double lambda, int n_theta = 64,
                              int n_h = 64);

} // namespace gldeg
