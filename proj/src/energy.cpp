#include "gldeg/energy.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "gldeg/elliptic.hpp"
#include "gldeg/errors.hpp"
#include "gldeg/parallel.hpp"

namespace gldeg {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<int> whole_mesh(const Mesh& mesh) {
    std::vector<int> all(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) all[t] = t;
    return all;
}

} // namespace

EnergyReport energy_GL(const ComplexField& u, double eps, const std::vector<int>& region) {
    if (eps <= 0) throw ParameterError("eps must be positive");
    const Mesh& mesh = *u.mesh;
    const std::vector<int>& tris = region.empty() ? whole_mesh(mesh) : region;
    std::vector<double> dir(tris.size()), pot(tris.size());
    parallel_for(tris.size(), [&](std::size_t i) {
        int t = tris[i];
        auto [d1u, d2u] = u.gradient(t);
        dir[i] = 0.5 * mesh.tri_area[t] * (std::norm(d1u) + std::norm(d2u));
        const auto& tr = mesh.triangles[t];
        double p = 0.0;
        for (int e = 0; e < 3; ++e) {
            cplx m = 0.5 * (u.values[tr[e]] + u.values[tr[(e + 1) % 3]]);
            double s = 1.0 - std::norm(m);
            p += s * s;
        }
        pot[i] = mesh.tri_area[t] * p / (3.0 * 4.0 * eps * eps);
    });
    EnergyReport rep;
    rep.dirichlet = pairwise_sum(dir);
    rep.potential = pairwise_sum(pot);
    rep.total = rep.dirichlet + rep.potential;
    return rep;
}

std::vector<cplx> energy_gradient(const ComplexField& u, double eps) {
    const Mesh& mesh = *u.mesh;
    std::vector<cplx> grad(mesh.vertex_count(), cplx(0.0, 0.0));
    // per-vertex accumulation over incident triangles: parallel and
    // deterministic (fixed per-row order)
    parallel_for(mesh.vertex_count(), [&](std::size_t v) {
        cplx g = 0.0;
        for (int t : mesh.vertex_tris[v]) {
            const auto& tr = mesh.triangles[t];
            int local = tr[0] == static_cast<int>(v) ? 0 : (tr[1] == static_cast<int>(v) ? 1 : 2);
            // stiffness part
            cplx gx = 0.0, gy = 0.0;
            for (int j = 0; j < 3; ++j) {
                gx += u.values[tr[j]] * mesh.tri_grad[t][j].x;
                gy += u.values[tr[j]] * mesh.tri_grad[t][j].y;
            }
            g += mesh.tri_area[t] *
                 (gx * mesh.tri_grad[t][local].x + gy * mesh.tri_grad[t][local].y);
            // potential part: derivative of the edge-midpoint rule; the two
            // midpoints touching `local` carry weight 1/2 each
            for (int e = 0; e < 3; ++e) {
                int a = e, b = (e + 1) % 3;
                if (a != local && b != local) continue;
                cplx m = 0.5 * (u.values[tr[a]] + u.values[tr[b]]);
                double s = 1.0 - std::norm(m);
                g += mesh.tri_area[t] / 3.0 * (-s / (eps * eps)) * m * 0.5;
            }
        }
        grad[v] = g;
    });
    return grad;
}

double I0(const Mesh& mesh, const std::vector<int>& d) {
    return dirichlet_energy(solve_h0(mesh, d).h0);
}

double L_eps(const ComplexField& w, const std::vector<int>& region, const ScalarField& rho,
             const std::vector<Vec2>& grad_theta, double eps) {
    const Mesh& mesh = *w.mesh;
    const std::vector<int>& tris = region.empty() ? whole_mesh(mesh) : region;

    // trace check: vertices of edges with exactly one incident region triangle
    std::map<std::pair<int, int>, int> edge_use;
    for (int t : tris) {
        const auto& tr = mesh.triangles[t];
        for (int i = 0; i < 3; ++i) {
            int a = tr[i], b = tr[(i + 1) % 3];
            edge_use[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    for (const auto& [e, n] : edge_use) {
        if (n != 1) continue;
        for (int v : {e.first, e.second})
            if (std::fabs(std::abs(w.values[v]) - 1.0) > 1e-6)
                throw PreconditionError("L_eps: |w| must equal 1 on the region boundary");
    }

    std::vector<double> per(tris.size());
    parallel_for(tris.size(), [&](std::size_t i) {
        int t = tris[i];
        auto [d1w, d2w] = w.gradient(t);
        double rc = rho.at_centroid(t);
        cplx wc = w.at_centroid(t);
        double gt2 = grad_theta[t].norm2();
        double val = 0.5 * rc * rc * (std::norm(d1w) + std::norm(d2w)) -
                     0.5 * std::norm(wc) * rc * rc * gt2;
        const auto& tr = mesh.triangles[t];
        double p = 0.0;
        for (int e = 0; e < 3; ++e) {
            cplx m = 0.5 * (w.values[tr[e]] + w.values[tr[(e + 1) % 3]]);
            double rm = 0.5 * (rho.values[tr[e]] + rho.values[tr[(e + 1) % 3]]);
            double s = 1.0 - std::norm(m);
            p += rm * rm * rm * rm * s * s;
        }
        per[i] = mesh.tri_area[t] * (val + p / (3.0 * 4.0 * eps * eps));
    });
    return pairwise_sum(per);
}

ResidualReport residual_GL(const ComplexField& u, double eps) {
    const Mesh& mesh = *u.mesh;
    auto grad = energy_gradient(u, eps);
    ResidualReport rep;

    std::vector<double> interior_terms;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.vertex_kind[v] >= 0) continue;
        double m = mesh.lumped_mass[v];
        interior_terms.push_back(std::norm(grad[v] / m) * m);
    }
    rep.interior = std::sqrt(pairwise_sum(interior_terms));

    rep.phase_flux.assign(mesh.loop_count(), 0.0);
    for (int l = 0; l < mesh.loop_count(); ++l) {
        std::vector<double> terms;
        for (int v : mesh.boundary_loops[l]) {
            rep.boundary_modulus = std::max(rep.boundary_modulus, std::fabs(std::abs(u.values[v]) - 1.0));
            double m = mesh.lumped_mass[v];
            cplx dir = u.values[v] / std::abs(u.values[v]);
            double r = std::imag(std::conj(dir) * grad[v]) / m;
            terms.push_back(r * r * m);
        }
        rep.phase_flux[l] = std::sqrt(pairwise_sum(terms));
    }
    return rep;
}

std::vector<Vortex> vortex_detect(const ComplexField& u) {
    const Mesh& mesh = *u.mesh;
    std::vector<Vortex> out;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tr = mesh.triangles[t];
        bool ok = true;
        double wind = 0.0;
        for (int i = 0; i < 3; ++i) {
            cplx a = u.values[tr[i]], b = u.values[tr[(i + 1) % 3]];
            if (std::abs(a) == 0.0 || std::abs(b) == 0.0) {
                ok = false;
                break;
            }
            wind += std::arg(b / a);
        }
        if (!ok) continue;
        int w = static_cast<int>(std::lround(wind / (2 * kPi)));
        if (w == 0) continue;
        Vortex v;
        v.triangle = t;
        v.winding = w;
        Vec2 c = mesh.centroid(t);
        double dist = 1e300;
        for (const auto& loop : mesh.boundary_loops)
            for (int b : loop) dist = std::min(dist, (mesh.vertices[b] - c).norm());
        v.boundary_distance = dist;
        out.push_back(v);
    }
    return out;
}

} // namespace gldeg
