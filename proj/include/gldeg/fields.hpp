#pragma once

#include <string>
#include <vector>

#include "gldeg/mesh.hpp"
#include "gldeg/vec2.hpp"

namespace gldeg {

struct ScalarField {
    const Mesh* mesh = nullptr;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Mesh& m, double fill = 0.0)
        : mesh(&m), values(m.vertex_count(), fill) {}

    Vec2 gradient(int tri) const; // P1 gradient, constant per triangle
    double at_centroid(int tri) const;
};

struct ComplexField {
    const Mesh* mesh = nullptr;
    std::vector<cplx> values;

    ComplexField() = default;
    explicit ComplexField(const Mesh& m, cplx fill = {0.0, 0.0})
        : mesh(&m), values(m.vertex_count(), fill) {}

    cplx at_centroid(int tri) const;
    // gradients of the real/imag parts as a pair of complex derivatives
    // (d1u, d2u), constant per triangle
    std::pair<cplx, cplx> gradient(int tri) const;
};

struct DegreeResult {
    double raw = 0.0;
    int rounded = 0;
    double defect = 0.0; // |raw - rounded|
};

struct DegreeSpec {
    std::vector<int> p; // boundary degree per hole
    int q = 0;          // boundary degree on the outer loop
    std::vector<int> d; // target bulk degrees
    std::vector<double> abdeg;

    bool in_class() const; // max_i |abdeg_i - d_i| <= 1/3
};

// Winding of u/|u| along the stored (counterclockwise) loop; requires
// |u| >= 0.1 at every loop vertex.
DegreeResult degree(const ComplexField& u, int loop_index);

// Winding of a sampled trace given as n values around a loop.
DegreeResult degree_of_samples(const std::vector<cplx>& samples);

// Approximate bulk degree per hole against weights V (one field per hole).
std::vector<double> abdeg(const ComplexField& u, const std::vector<ScalarField>& V);

// Right-hand side of the abdeg Lipschitz bound: (2/pi) |V|_C1 Lambda^(1/2) |u-v|_L2
// with the discrete C1 norm of V and Lambda = max of the two energies.
double abdeg_lipschitz_bound(const ScalarField& V, double energy_u, double energy_v,
                             double l2_distance);

double discrete_c1_norm(const ScalarField& V);
double l2_distance(const ComplexField& u, const ComplexField& v);

// Phase lifting on a simply connected triangle subset; anchor value in [0, 2pi).
ScalarField lift_phase(const ComplexField& u, const std::vector<int>& region_tris,
                       int anchor_vertex);

int ae_distance(const std::vector<int>& d, int d_total, const std::vector<int>& p, int q);

std::string scalar_field_to_csv(const ScalarField& f);
std::string complex_field_to_csv(const ComplexField& f);

} // namespace gldeg
