#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gldeg/errors.hpp"
#include "gldeg/mesh.hpp"

using namespace gldeg;

namespace {

DomainSpec annulus_spec(double edge) {
    DomainSpec spec;
    spec.outer = {{0, 0}, 1.0};
    spec.holes = {{{0, 0}, 0.3}};
    spec.target_edge_length = edge;
    return spec;
}

} // namespace

TEST_CASE("annulus mesh has two loops and Euler characteristic 0") {
    Mesh m = build_mesh(annulus_spec(0.05));
    CHECK(m.loop_count() == 2);
    CHECK(m.euler_characteristic() == 0);
    CHECK(m.min_angle_deg() >= 20.0);
}

TEST_CASE("disk with two holes has three loops and chi = -1") {
    DomainSpec spec;
    spec.outer = {{0, 0}, 1.0};
    spec.holes = {{{-0.4, 0}, 0.2}, {{0.45, 0.1}, 0.15}};
    spec.target_edge_length = 0.06;
    Mesh m = build_mesh(spec);
    CHECK(m.loop_count() == 3);
    CHECK(m.euler_characteristic() == -1);
    CHECK(m.min_angle_deg() >= 20.0);
}

TEST_CASE("refinement quadruples the triangle count within tolerance") {
    Mesh coarse = build_mesh(annulus_spec(0.1));
    Mesh fine = build_mesh(annulus_spec(0.05));
    double ratio = double(fine.triangle_count()) / double(coarse.triangle_count());
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
}

TEST_CASE("boundary vertices sit on their circles") {
    Mesh m = build_mesh(annulus_spec(0.08));
    for (int v = 0; v < m.vertex_count(); ++v) {
        int k = m.vertex_kind[v];
        if (k < 0) continue;
        double r = m.vertices[v].norm();
        double target = (k == 0) ? 1.0 : 0.3;
        CHECK(std::fabs(r - target) <= 1e-12);
    }
}

TEST_CASE("loop orientations are counterclockwise") {
    Mesh m = build_mesh(annulus_spec(0.08));
    for (const auto& loop : m.boundary_loops) {
        double area = 0.0;
        for (std::size_t i = 0; i < loop.size(); ++i) {
            Vec2 a = m.vertices[loop[i]];
            Vec2 b = m.vertices[loop[(i + 1) % loop.size()]];
            area += 0.5 * a.cross(b);
        }
        CHECK(area > 0.0);
    }
}

TEST_CASE("overlapping holes are rejected") {
    DomainSpec spec;
    spec.outer = {{0, 0}, 1.0};
    spec.holes = {{{-0.1, 0}, 0.2}, {{0.1, 0}, 0.2}};
    spec.target_edge_length = 0.05;
    CHECK_THROWS_AS(build_mesh(spec), GeometryError);
}

TEST_CASE("coarse edge length near a gap is rejected") {
    DomainSpec spec;
    spec.outer = {{0, 0}, 1.0};
    spec.holes = {{{0.6, 0}, 0.3}};
    spec.target_edge_length = 0.09; // gap is 0.1
    CHECK_THROWS_AS(build_mesh(spec), ResolutionError);
}

TEST_CASE("annulus chart formulas") {
    AnnulusChart c1{0.3, 1};
    auto p = annulus_exact_chart(c1, {1.0 - 1e-9, 0.0});
    CHECK(p.h == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p.theta == doctest::Approx(0.0));
    CHECK(p.rho_u == 1.0);

    AnnulusChart c2{0.3, 2};
    double delta = 0.4;
    auto q = annulus_exact_chart(c2, {std::exp(-delta / 2), 0.0});
    CHECK(q.h == doctest::Approx(1.0 - delta).epsilon(1e-12));

    auto r = annulus_exact_chart(c1, {0.5, 0.0});
    CHECK(r.grad_theta.norm() == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(annulus_exact_chart(c1, {1.5, 0.0}), ChartError);
}

TEST_CASE("chart gradients: grad h orthogonal to grad theta, |grad h| = |grad theta|") {
    // rho = 1 so |grad h| should equal rho^2 |grad theta|; grad h is computed
    // by finite differences of the exact h formula
    AnnulusChart c{0.3, 2};
    for (Vec2 p : {Vec2{0.5, 0.2}, Vec2{-0.4, 0.3}, Vec2{0.1, -0.6}}) {
        auto cp = annulus_exact_chart(c, p);
        double eps = 1e-7;
        double hx = (annulus_exact_chart(c, {p.x + eps, p.y}).h - annulus_exact_chart(c, {p.x - eps, p.y}).h) / (2 * eps);
        double hy = (annulus_exact_chart(c, {p.x, p.y + eps}).h - annulus_exact_chart(c, {p.x, p.y - eps}).h) / (2 * eps);
        Vec2 gh{hx, hy};
        CHECK(std::fabs(gh.dot(cp.grad_theta)) <= 1e-5);
        CHECK(gh.norm() == doctest::Approx(cp.grad_theta.norm()).epsilon(1e-6));
    }
}

TEST_CASE("refine patch shrinks local edge lengths") {
    DomainSpec spec = annulus_spec(0.1);
    spec.refine.push_back({{0.65, 0.0}, 0.02});
    Mesh m = build_mesh(spec);
    double local_min = 1e300;
    for (int t = 0; t < m.triangle_count(); ++t) {
        Vec2 c = m.centroid(t);
        if ((c - Vec2{0.65, 0.0}).norm() > 0.05) continue;
        for (int i = 0; i < 3; ++i) {
            Vec2 a = m.vertices[m.triangles[t][i]];
            Vec2 b = m.vertices[m.triangles[t][(i + 1) % 3]];
            local_min = std::min(local_min, (a - b).norm());
        }
    }
    CHECK(local_min < 0.04);
    CHECK(m.min_angle_deg() >= 20.0);
}

TEST_CASE("mesh text export starts with the count header") {
    Mesh m = build_mesh(annulus_spec(0.1));
    std::string txt = mesh_to_text(m);
    CHECK(txt.find(' ') != std::string::npos);
    int nv = 0, nt = 0, nl = 0;
    CHECK(std::sscanf(txt.c_str(), "%d %d %d", &nv, &nt, &nl) == 3);
    CHECK(nv == m.vertex_count());
    CHECK(nt == m.triangle_count());
    CHECK(nl == 2);
}
