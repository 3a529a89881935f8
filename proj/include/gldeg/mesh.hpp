#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gldeg/vec2.hpp"

namespace gldeg {

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

// Local refinement patch: target edge length `h` at `center`, graded back to
// the global target at rate 0.3 per unit distance.
struct RefinePatch {
    Vec2 center;
    double h = 0.0;
};

struct DomainSpec {
    Circle outer;
    std::vector<Circle> holes;
    double target_edge_length = 0.05;
    std::vector<RefinePatch> refine;
    double min_angle_deg = 20.0;

    void validate() const; // throws GeometryError / ResolutionError
    double size_at(Vec2 p) const;
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles; // counterclockwise
    // loop 0 = outer (counterclockwise), loops 1.. = holes, each stored
    // counterclockwise around its hole
    std::vector<std::vector<int>> boundary_loops;
    std::vector<int> vertex_kind; // -1 interior, k >= 0 on loop k

    // derived, filled by finalize()
    std::vector<double> tri_area;
    std::vector<std::array<Vec2, 3>> tri_grad; // P1 hat gradients
    std::vector<double> lumped_mass;
    std::vector<std::vector<int>> vertex_tris; // incident triangles, sorted

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }
    int loop_count() const { return static_cast<int>(boundary_loops.size()); }
    std::size_t edge_count() const;
    int euler_characteristic() const;
    double min_angle_deg() const;
    Vec2 centroid(int t) const;

    void finalize();
};

Mesh build_mesh(const DomainSpec& spec);

// Plain-text export: header line, then one vertex per line (index x y kind),
// then one triangle per line (three vertex indices).
std::string mesh_to_text(const Mesh& mesh);

struct AnnulusChart {
    double inner_radius = 0.3; // in (0,1)
    int winding = 1;
};

struct ChartPoint {
    double theta = 0.0;
    double h = 0.0;
    Vec2 grad_theta;
    double rho_u = 1.0;
};

// theta = d*arg(z), h = 1 + d*ln|z|; throws ChartError outside the annulus.
ChartPoint annulus_exact_chart(const AnnulusChart& chart, Vec2 p);

// Delaunay triangulation of a point set (convex hull filled); used by the
// mesher and exposed for tests.
std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& pts);

} // namespace gldeg
