#include "gldeg/fields.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <set>
#include <sstream>

#include "gldeg/errors.hpp"
#include "gldeg/parallel.hpp"

namespace gldeg {

namespace {
constexpr double kPi = std::numbers::pi;
}

Vec2 ScalarField::gradient(int tri) const {
    const auto& t = mesh->triangles[tri];
    Vec2 g{0, 0};
    for (int i = 0; i < 3; ++i) g += mesh->tri_grad[tri][i] * values[t[i]];
    return g;
}

double ScalarField::at_centroid(int tri) const {
    const auto& t = mesh->triangles[tri];
    return (values[t[0]] + values[t[1]] + values[t[2]]) / 3.0;
}

cplx ComplexField::at_centroid(int tri) const {
    const auto& t = mesh->triangles[tri];
    return (values[t[0]] + values[t[1]] + values[t[2]]) / 3.0;
}

std::pair<cplx, cplx> ComplexField::gradient(int tri) const {
    const auto& t = mesh->triangles[tri];
    cplx d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        Vec2 g = mesh->tri_grad[tri][i];
        d1 += values[t[i]] * g.x;
        d2 += values[t[i]] * g.y;
    }
    return {d1, d2};
}

bool DegreeSpec::in_class() const {
    for (std::size_t i = 0; i < d.size(); ++i)
        if (std::fabs(abdeg[i] - d[i]) > 1.0 / 3.0) return false;
    return true;
}

DegreeResult degree_of_samples(const std::vector<cplx>& samples) {
    double total = 0.0;
    const std::size_t n = samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        cplx a = samples[i], b = samples[(i + 1) % n];
        if (std::abs(a) < 0.1 || std::abs(b) < 0.1)
            throw DegeneracyError("trace modulus below 0.1, winding undefined");
        total += std::arg(b / a);
    }
    DegreeResult r;
    r.raw = total / (2 * kPi);
    r.rounded = static_cast<int>(std::lround(r.raw));
    r.defect = std::fabs(r.raw - r.rounded);
    return r;
}

DegreeResult degree(const ComplexField& u, int loop_index) {
    const auto& loop = u.mesh->boundary_loops.at(loop_index);
    std::vector<cplx> samples;
    samples.reserve(loop.size());
    for (int v : loop) samples.push_back(u.values[v]);
    return degree_of_samples(samples);
}

std::vector<double> abdeg(const ComplexField& u, const std::vector<ScalarField>& V) {
    const Mesh& mesh = *u.mesh;
    for (const auto& Vi : V)
        if (Vi.mesh != u.mesh) throw std::runtime_error("abdeg: fields on different meshes");
    std::vector<double> out;
    std::vector<double> per_tri(mesh.triangle_count());
    for (const ScalarField& Vi : V) {
        parallel_for(mesh.triangle_count(), [&](std::size_t t) {
            auto [d1u, d2u] = u.gradient(static_cast<int>(t));
            Vec2 gv = Vi.gradient(static_cast<int>(t));
            cplx uc = u.at_centroid(static_cast<int>(t));
            per_tri[t] = mesh.tri_area[t] * cross2(uc, gv.x * d2u - gv.y * d1u);
        });
        out.push_back(pairwise_sum(per_tri) / (2 * kPi));
    }
    return out;
}

double discrete_c1_norm(const ScalarField& V) {
    double m = 0.0;
    for (double v : V.values) m = std::max(m, std::fabs(v));
    double g = 0.0;
    for (int t = 0; t < V.mesh->triangle_count(); ++t) g = std::max(g, V.gradient(t).norm());
    return m + g;
}

double l2_distance(const ComplexField& u, const ComplexField& v) {
    const Mesh& mesh = *u.mesh;
    std::vector<double> per_tri(mesh.triangle_count());
    parallel_for(mesh.triangle_count(), [&](std::size_t t) {
        const auto& tr = mesh.triangles[t];
        // edge-midpoint quadrature, exact for the squared P1 difference
        double s = 0.0;
        for (int i = 0; i < 3; ++i) {
            cplx a = u.values[tr[i]] - v.values[tr[i]];
            cplx b = u.values[tr[(i + 1) % 3]] - v.values[tr[(i + 1) % 3]];
            s += std::norm(0.5 * (a + b));
        }
        per_tri[t] = mesh.tri_area[t] * s / 3.0;
    });
    return std::sqrt(pairwise_sum(per_tri));
}

double abdeg_lipschitz_bound(const ScalarField& V, double energy_u, double energy_v,
                             double l2_dist) {
    double lambda = std::max(energy_u, energy_v);
    return (2.0 / kPi) * discrete_c1_norm(V) * std::sqrt(lambda) * l2_dist;
}

ScalarField lift_phase(const ComplexField& u, const std::vector<int>& region_tris,
                       int anchor_vertex) {
    const Mesh& mesh = *u.mesh;

    // Euler characteristic of the sub-mesh must be 1 (simply connected)
    std::set<int> verts;
    std::set<std::pair<int, int>> edges;
    for (int t : region_tris) {
        const auto& tr = mesh.triangles[t];
        for (int i = 0; i < 3; ++i) {
            verts.insert(tr[i]);
            int a = tr[i], b = tr[(i + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
    }
    int chi = static_cast<int>(verts.size()) - static_cast<int>(edges.size()) +
              static_cast<int>(region_tris.size());
    if (chi != 1) throw TopologyError("lifting region is not simply connected");
    if (!verts.count(anchor_vertex)) throw TopologyError("anchor vertex outside the region");
    for (int v : verts)
        if (std::abs(u.values[v]) <= 0.0) throw DegeneracyError("zero of u inside the lifting region");

    ScalarField theta(mesh, 0.0);
    std::vector<char> visited(mesh.vertex_count(), 0);
    double a0 = std::arg(u.values[anchor_vertex]);
    if (a0 < 0) a0 += 2 * kPi;
    theta.values[anchor_vertex] = a0;
    visited[anchor_vertex] = 1;

    // adjacency restricted to region edges
    std::vector<std::vector<int>> adj(mesh.vertex_count());
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::deque<int> queue{anchor_vertex};
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int w : adj[v]) {
            if (visited[w]) continue;
            double inc = std::arg(u.values[w] / u.values[v]); // principal branch, (-pi, pi]
            theta.values[w] = theta.values[v] + inc;
            visited[w] = 1;
            queue.push_back(w);
        }
    }
    return theta;
}

int ae_distance(const std::vector<int>& d, int d_total, const std::vector<int>& p, int q) {
    if (d.size() != p.size()) throw std::runtime_error("ae_distance: hole count mismatch");
    int s = std::abs(d_total - q);
    for (std::size_t i = 0; i < d.size(); ++i) s += std::abs(d[i] - p[i]);
    return s;
}

std::string scalar_field_to_csv(const ScalarField& f) {
    std::ostringstream os;
    os.precision(17);
    os << "vertex,x,y,value\n";
    for (int v = 0; v < f.mesh->vertex_count(); ++v)
        os << v << "," << f.mesh->vertices[v].x << "," << f.mesh->vertices[v].y << ","
           << f.values[v] << "\n";
    return os.str();
}

std::string complex_field_to_csv(const ComplexField& f) {
    std::ostringstream os;
    os.precision(17);
    os << "vertex,x,y,re,im\n";
    for (int v = 0; v < f.mesh->vertex_count(); ++v)
        os << v << "," << f.mesh->vertices[v].x << "," << f.mesh->vertices[v].y << ","
           << f.values[v].real() << "," << f.values[v].imag() << "\n";
    return os.str();
}

} // namespace gldeg
