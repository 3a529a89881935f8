#pragma once

#include <string>
#include <vector>

#include "gldeg/fields.hpp"
#include "gldeg/mesh.hpp"

namespace gldeg {

struct EnergyParams {
    double eps = 0.1;
    double lambda = 0.0;
};

struct EnergyReport {
    double dirichlet = 0.0;
    double potential = 0.0;
    double total = 0.0;
    std::string tag;
};

// (1/2) integral |grad u|^2 + (1/(4 eps^2)) integral (1-|u|^2)^2 over the
// given triangles (all triangles when region is empty).
EnergyReport energy_GL(const ComplexField& u, double eps,
                       const std::vector<int>& region = {});

// Gradient of the discrete energy with respect to the vertex values, using
// the same quadrature as energy_GL.
std::vector<cplx> energy_gradient(const ComplexField& u, double eps);

double I0(const Mesh& mesh, const std::vector<int>& d);

// Splitting remainder of the energy decomposition:
// (1/2) int rho^2 |grad w|^2 - (1/2) int |w|^2 rho^2 |grad theta|^2
//   + (1/(4 eps^2)) int rho^4 (1-|w|^2)^2
// grad_theta is one vector per triangle; requires |w| = 1 on the region
// boundary within 1e-6.
double L_eps(const ComplexField& w, const std::vector<int>& region,
             const ScalarField& rho, const std::vector<Vec2>& grad_theta, double eps);

struct ResidualReport {
    double interior = 0.0;              // L2 norm of the discrete EL residual
    double boundary_modulus = 0.0;      // max | |u|-1 | over boundary vertices
    std::vector<double> phase_flux;     // per-loop norm of the u x d_nu u defect
};

ResidualReport residual_GL(const ComplexField& u, double eps);

struct Vortex {
    int triangle = 0;
    int winding = 0;
    double boundary_distance = 0.0;
};

std::vector<Vortex> vortex_detect(const ComplexField& u);

} // namespace gldeg
