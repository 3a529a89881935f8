#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "gldeg/elliptic.hpp"
#include "gldeg/energy.hpp"
#include "gldeg/fields.hpp"
#include "gldeg/mesh.hpp"
#include "gldeg/parallel.hpp"
#include "gldeg/reference.hpp"

using namespace gldeg;

namespace {

template <typename F>
double time_ms(F&& f, int reps) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

} // namespace

int main() {
    DomainSpec spec;
    spec.outer = {{0, 0}, 1.0};
    spec.holes = {{{0, 0}, 0.3}};
    spec.target_edge_length = 0.015;
    Mesh mesh = build_mesh(spec);
    std::printf("mesh: %d vertices, %d triangles, %d threads\n", mesh.vertex_count(),
                mesh.triangle_count(), thread_count());

    ComplexField u(mesh), v(mesh);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-0.2, 0.2);
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        double phi = std::atan2(mesh.vertices[i].y, mesh.vertices[i].x);
        u.values[i] = std::polar(1.0 + U(rng), phi);
        v.values[i] = std::polar(1.0 + U(rng), phi + U(rng));
    }
    std::vector<ScalarField> V = solve_all_V(mesh);
    const double eps = 0.05;
    const int reps = 50;

    double es = 0, ep = 0, as = 0, ap = 0, ls = 0, lp = 0;
    double t_es = time_ms([&] { es = energy_GL_serial(u, eps).total; }, reps);
    double t_ep = time_ms([&] { ep = energy_GL(u, eps).total; }, reps);
    double t_as = time_ms([&] { as = abdeg_serial(u, V)[0]; }, reps);
    double t_ap = time_ms([&] { ap = abdeg(u, V)[0]; }, reps);
    double t_ls = time_ms([&] { ls = l2_distance_serial(u, v); }, reps);
    double t_lp = time_ms([&] { lp = l2_distance(u, v); }, reps);

    std::printf("%-12s %10s %10s %8s %12s\n", "kernel", "serial ms", "parallel", "speedup",
                "max |diff|");
    std::printf("%-12s %10.3f %10.3f %8.2f %12.3e\n", "energy_GL", t_es, t_ep, t_es / t_ep,
                std::fabs(es - ep));
    std::printf("%-12s %10.3f %10.3f %8.2f %12.3e\n", "abdeg", t_as, t_ap, t_as / t_ap,
                std::fabs(as - ap));
    std::printf("%-12s %10.3f %10.3f %8.2f %12.3e\n", "l2_distance", t_ls, t_lp, t_ls / t_lp,
                std::fabs(ls - lp));

    bool ok = std::fabs(es - ep) < 1e-10 && std::fabs(as - ap) < 1e-12 && std::fabs(ls - lp) < 1e-12;
    std::printf("cross-check: %s\n", ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
}
