#include "gldeg/elliptic.hpp"

#include <cmath>
#include <numbers>

#include "gldeg/errors.hpp"
#include "gldeg/parallel.hpp"
#include "gldeg/sparse.hpp"

namespace gldeg {

namespace {
constexpr double kPi = std::numbers::pi;
}

ScalarField solve_V(const Mesh& mesh, int hole_index) {
    const int loop = hole_index + 1;
    if (loop < 1 || loop >= mesh.loop_count()) throw std::runtime_error("solve_V: bad hole index");
    DofMap map(mesh);
    for (int l = 0; l < mesh.loop_count(); ++l) map.fix_loop(l, l == loop ? 0.0 : 1.0);
    map.build();
    auto sys = assemble_laplace(mesh, map);
    std::vector<double> x;
    solve_cg(sys.A, sys.rhs, x);
    ScalarField V(mesh);
    V.values = map.expand(x);
    return V;
}

std::vector<ScalarField> solve_all_V(const Mesh& mesh) {
    std::vector<ScalarField> out;
    for (int i = 0; i + 1 < mesh.loop_count(); ++i) out.push_back(solve_V(mesh, i));
    return out;
}

H0Result solve_h0(const Mesh& mesh, const std::vector<int>& d) {
    if (static_cast<int>(d.size()) != mesh.loop_count() - 1)
        throw std::runtime_error("solve_h0: need one degree per hole");
    DofMap map(mesh);
    map.fix_loop(0, 1.0);
    for (int l = 1; l < mesh.loop_count(); ++l) map.group_loop(l);
    map.build();
    auto sys = assemble_laplace(mesh, map);
    // the group-dof equation tests against the loop's hat sum chi_k:
    // integral grad(h0).grad(chi_k) = -2 pi d_k (outward flux from the hole)
    for (int l = 1; l < mesh.loop_count(); ++l)
        sys.rhs[map.loop_group_dof(l)] += -2 * kPi * d[l - 1];
    std::vector<double> x;
    solve_cg(sys.A, sys.rhs, x);
    H0Result res;
    res.h0 = ScalarField(mesh);
    res.h0.values = map.expand(x);
    for (int l = 1; l < mesh.loop_count(); ++l) {
        res.hole_constants.push_back(x[map.loop_group_dof(l)]);
        res.fluxes.push_back(loop_flux(res.h0, l));
    }
    return res;
}

ConjugateResult harmonic_conjugate(const ComplexField& u) {
    const Mesh& mesh = *u.mesh;
    // current F = u x grad(u) per triangle; grad(h) must equal (F2, -F1)
    std::vector<Vec2> G(mesh.triangle_count());
    parallel_for(mesh.triangle_count(), [&](std::size_t t) {
        auto [d1u, d2u] = u.gradient(static_cast<int>(t));
        cplx uc = u.at_centroid(static_cast<int>(t));
        double f1 = cross2(uc, d1u);
        double f2 = cross2(uc, d2u);
        G[t] = {f2, -f1};
    });
    DofMap map(mesh);
    map.fix_loop(0, 1.0);
    for (int l = 1; l < mesh.loop_count(); ++l) map.group_loop(l);
    map.build();
    auto sys = assemble_laplace(mesh, map);
    add_gradient_load(mesh, map, G, sys.rhs);
    std::vector<double> x;
    solve_cg(sys.A, sys.rhs, x);
    ConjugateResult res;
    res.h = ScalarField(mesh);
    res.h.values = map.expand(x);
    for (int l = 1; l < mesh.loop_count(); ++l)
        res.hole_constants.push_back(x[map.loop_group_dof(l)]);
    return res;
}

ComplexField harmonic_extension(const Mesh& disk, const std::vector<cplx>& trace) {
    if (disk.loop_count() != 1) throw std::runtime_error("harmonic_extension: single-loop mesh required");
    const auto& loop = disk.boundary_loops[0];
    if (trace.size() != loop.size())
        throw std::runtime_error("harmonic_extension: one trace value per loop vertex required");
    ComplexField out(disk);
    for (int part = 0; part < 2; ++part) {
        DofMap map(disk);
        for (std::size_t i = 0; i < loop.size(); ++i)
            map.fix_vertex(loop[i], part == 0 ? trace[i].real() : trace[i].imag());
        map.build();
        auto sys = assemble_laplace(disk, map);
        std::vector<double> x;
        solve_cg(sys.A, sys.rhs, x);
        auto vals = map.expand(x);
        for (int v = 0; v < disk.vertex_count(); ++v) {
            if (part == 0)
                out.values[v] += vals[v];
            else
                out.values[v] += cplx(0.0, vals[v]);
        }
    }
    return out;
}

double dirichlet_energy(const ScalarField& f) {
    const Mesh& mesh = *f.mesh;
    std::vector<double> per_tri(mesh.triangle_count());
    parallel_for(mesh.triangle_count(), [&](std::size_t t) {
        per_tri[t] = 0.5 * mesh.tri_area[t] * f.gradient(static_cast<int>(t)).norm2();
    });
    return pairwise_sum(per_tri);
}

double loop_flux(const ScalarField& f, int loop) {
    const Mesh& mesh = *f.mesh;
    // chi = hat sum over the loop vertices; flux = -integral grad(f).grad(chi),
    // positive for a field increasing away from the loop (annulus h0 = 1+ln(rho)
    // gives +2 pi through the hole loop)
    std::vector<char> on_loop(mesh.vertex_count(), 0);
    for (int v : mesh.boundary_loops.at(loop)) on_loop[v] = 1;
    double s = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tr = mesh.triangles[t];
        Vec2 gchi{0, 0};
        bool touches = false;
        for (int i = 0; i < 3; ++i)
            if (on_loop[tr[i]]) {
                gchi += mesh.tri_grad[t][i];
                touches = true;
            }
        if (touches) s += mesh.tri_area[t] * f.gradient(t).dot(gchi);
    }
    return -s;
}

} // namespace gldeg
