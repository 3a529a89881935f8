#pragma once

#include <vector>

#include "gldeg/fields.hpp"
#include "gldeg/mesh.hpp"

namespace gldeg {

// Harmonic weight: 0 on hole loop i (loop index i+1), 1 on all other loops.
ScalarField solve_V(const Mesh& mesh, int hole_index);

std::vector<ScalarField> solve_all_V(const Mesh& mesh);

struct H0Result {
    ScalarField h0;
    std::vector<double> hole_constants; // value of h0 on each hole loop
    std::vector<double> fluxes;         // a-posteriori flux through each hole loop
};

// Harmonic field equal to 1 on the outer loop, an unknown constant on each
// hole loop, with weak flux 2*pi*d_k through hole loop k.
H0Result solve_h0(const Mesh& mesh, const std::vector<int>& d);

struct ConjugateResult {
    ScalarField h;
    std::vector<double> hole_constants;
};

// Least-squares solution of grad_perp(h) = u x grad(u), h = 1 on the outer
// loop, constant per hole loop.
ConjugateResult harmonic_conjugate(const ComplexField& u);

// Componentwise harmonic extension of a boundary trace on a single-loop mesh.
ComplexField harmonic_extension(const Mesh& disk, const std::vector<cplx>& trace);

double dirichlet_energy(const ScalarField& f); // (1/2) integral |grad f|^2

// Weak flux of grad(f) through the given loop: sum over the loop's hat sum
// chi of integral grad(f).grad(chi) over the mesh, signed outward from the
// domain into the hole.
double loop_flux(const ScalarField& f, int loop);

} // namespace gldeg
