#include "gldeg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "gldeg/errors.hpp"

namespace gldeg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGradeRate = 0.3;

// deterministic xorshift jitter for seed points (breaks lattice cocircularity)
struct Rng {
    std::uint64_t s = 0x9e3779b97f4a7c15ull;
    double next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return double(s >> 11) * 0x1.0p-53;
    }
};

struct SignedDistance {
    const DomainSpec& spec;

    double operator()(Vec2 p) const {
        double d = (p - spec.outer.center).norm() - spec.outer.radius;
        for (const Circle& h : spec.holes)
            d = std::max(d, h.radius - (p - h.center).norm());
        return d;
    }

    Vec2 grad(Vec2 p) const {
        double best = (p - spec.outer.center).norm() - spec.outer.radius;
        Vec2 g = (p - spec.outer.center);
        double gn = g.norm();
        g = gn > 0 ? g / gn : Vec2{1, 0};
        for (const Circle& h : spec.holes) {
            double r = (p - h.center).norm();
            double d = h.radius - r;
            if (d > best) {
                best = d;
                g = r > 0 ? (h.center - p) / r : Vec2{1, 0};
            }
        }
        return g;
    }
};

std::vector<Vec2> circle_points(const Circle& c, const DomainSpec& spec) {
    // adaptive angular stepping against the size field, rescaled to close
    std::vector<double> steps;
    double total = 0.0, phi = 0.0;
    while (total < 2 * kPi) {
        Vec2 p{c.center.x + c.radius * std::cos(phi), c.center.y + c.radius * std::sin(phi)};
        double dphi = spec.size_at(p) / c.radius;
        dphi = std::min(dphi, kPi / 4);
        steps.push_back(dphi);
        total += dphi;
        phi += dphi;
    }
    if (steps.size() < 8) throw ResolutionError("edge length too coarse for a boundary circle");
    double scale = 2 * kPi / total;
    std::vector<Vec2> pts;
    pts.reserve(steps.size());
    phi = 0.0;
    for (double s : steps) {
        pts.push_back({c.center.x + c.radius * std::cos(phi), c.center.y + c.radius * std::sin(phi)});
        phi += s * scale;
    }
    return pts;
}

double tri_signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * (b - a).cross(c - a); }

double polygon_signed_area(const std::vector<Vec2>& v, const std::vector<int>& loop) {
    double s = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        Vec2 a = v[loop[i]];
        Vec2 b = v[loop[(i + 1) % loop.size()]];
        s += a.cross(b);
    }
    return 0.5 * s;
}

} // namespace

void DomainSpec::validate() const {
    if (outer.radius <= 0) throw GeometryError("outer radius must be positive");
    if (target_edge_length <= 0) throw GeometryError("edge length must be positive");
    for (const Circle& h : holes) {
        if (h.radius <= 0) throw GeometryError("hole radius must be positive");
        double gap = outer.radius - ((h.center - outer.center).norm() + h.radius);
        if (gap <= 0) throw GeometryError("hole not strictly inside the outer disk");
        if (gap < 1.5 * target_edge_length)
            throw ResolutionError("edge length too coarse to separate hole from outer boundary");
    }
    for (std::size_t i = 0; i < holes.size(); ++i) {
        for (std::size_t j = i + 1; j < holes.size(); ++j) {
            double gap = (holes[i].center - holes[j].center).norm() - holes[i].radius - holes[j].radius;
            if (gap <= 0) throw GeometryError("hole closures overlap");
            if (gap < 1.5 * target_edge_length)
                throw ResolutionError("edge length too coarse to separate holes");
        }
    }
}

double DomainSpec::size_at(Vec2 p) const {
    double h = target_edge_length;
    for (const RefinePatch& r : refine)
        h = std::min(h, r.h + kGradeRate * (p - r.center).norm());
    return h;
}

std::size_t Mesh::edge_count() const {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : triangles)
        for (int i = 0; i < 3; ++i) {
            int a = t[i], b = t[(i + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
    return edges.size();
}

int Mesh::euler_characteristic() const {
    return vertex_count() - static_cast<int>(edge_count()) + triangle_count();
}

double Mesh::min_angle_deg() const {
    double worst = 180.0;
    for (const auto& t : triangles) {
        Vec2 p[3] = {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
        for (int i = 0; i < 3; ++i) {
            Vec2 u = p[(i + 1) % 3] - p[i];
            Vec2 v = p[(i + 2) % 3] - p[i];
            double ang = std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
            worst = std::min(worst, ang * 180.0 / kPi);
        }
    }
    return worst;
}

Vec2 Mesh::centroid(int t) const {
    const auto& tr = triangles[t];
    return (vertices[tr[0]] + vertices[tr[1]] + vertices[tr[2]]) / 3.0;
}

void Mesh::finalize() {
    const int nt = triangle_count();
    tri_area.assign(nt, 0.0);
    tri_grad.assign(nt, {});
    lumped_mass.assign(vertex_count(), 0.0);
    vertex_tris.assign(vertex_count(), {});
    for (int t = 0; t < nt; ++t) {
        auto& tr = triangles[t];
        Vec2 a = vertices[tr[0]], b = vertices[tr[1]], c = vertices[tr[2]];
        double area = tri_signed_area(a, b, c);
        if (area < 0) {
            std::swap(tr[1], tr[2]);
            std::swap(b, c);
            area = -area;
        }
        tri_area[t] = area;
        // grad of hat_i is (opposite edge rotated) / (2 area)
        tri_grad[t][0] = (c - b).perp() / (2 * area);
        tri_grad[t][1] = (a - c).perp() / (2 * area);
        tri_grad[t][2] = (b - a).perp() / (2 * area);
        for (int i = 0; i < 3; ++i) {
            lumped_mass[tr[i]] += area / 3.0;
            vertex_tris[tr[i]].push_back(t);
        }
    }
}

Mesh build_mesh(const DomainSpec& spec) {
    spec.validate();
    SignedDistance sd{spec};

    // fixed boundary points, one block per circle, loop index recorded
    std::vector<Vec2> pts;
    std::vector<int> kind;
    std::vector<Circle> circles;
    circles.push_back(spec.outer);
    for (const Circle& h : spec.holes) circles.push_back(h);
    for (std::size_t k = 0; k < circles.size(); ++k) {
        for (Vec2 p : circle_points(circles[k], spec)) {
            pts.push_back(p);
            kind.push_back(static_cast<int>(k));
        }
    }
    const int nfix = static_cast<int>(pts.size());

    // interior seeds: coarse hex lattice plus denser lattices per refine patch
    Rng rng;
    auto seed_lattice = [&](Vec2 lo, Vec2 hi, double h, auto accept) {
        double dy = h * std::sqrt(3.0) / 2.0;
        int row = 0;
        for (double y = lo.y; y <= hi.y; y += dy, ++row) {
            double x0 = lo.x + ((row % 2) ? h / 2 : 0.0);
            for (double x = x0; x <= hi.x; x += h) {
                Vec2 p{x + (rng.next() - 0.5) * 1e-4 * h, y + (rng.next() - 0.5) * 1e-4 * h};
                if (accept(p)) {
                    pts.push_back(p);
                    kind.push_back(-1);
                }
            }
        }
    };
    const double h0 = spec.target_edge_length;
    Vec2 lo = spec.outer.center - Vec2{spec.outer.radius, spec.outer.radius};
    Vec2 hi = spec.outer.center + Vec2{spec.outer.radius, spec.outer.radius};
    auto inside = [&](Vec2 p) { return sd(p) < -0.35 * spec.size_at(p); };
    seed_lattice(lo, hi, h0, inside);
    for (const RefinePatch& r : spec.refine) {
        double reach = (h0 - r.h) / kGradeRate;
        Vec2 rlo = r.center - Vec2{reach, reach};
        Vec2 rhi = r.center + Vec2{reach, reach};
        seed_lattice(rlo, rhi, r.h, [&](Vec2 p) {
            if (!inside(p)) return false;
            double hp = spec.size_at(p);
            if (hp >= h0) return false;
            double extra = 1.0 / (hp * hp) - 1.0 / (h0 * h0);
            return rng.next() < extra * r.h * r.h;
        });
    }

    // distmesh relaxation
    const double Fscale = 1.2, dt = 0.2, ttol = 0.1;
    const int max_iter = 220;
    std::vector<Vec2> last_tri_pos = pts;
    std::vector<std::array<int, 3>> tris;
    auto needs_retri = [&]() {
        for (std::size_t i = 0; i < pts.size(); ++i)
            if ((pts[i] - last_tri_pos[i]).norm() > ttol * spec.size_at(pts[i])) return true;
        return false;
    };
    bool first = true;
    for (int iter = 0; iter < max_iter; ++iter) {
        if (first || needs_retri()) {
            tris = delaunay_triangulate(pts);
            std::erase_if(tris, [&](const std::array<int, 3>& t) {
                Vec2 c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
                return sd(c) > 0.0;
            });
            last_tri_pos = pts;
            first = false;
        }
        std::set<std::pair<int, int>> bar_set;
        for (const auto& t : tris)
            for (int i = 0; i < 3; ++i)
                bar_set.insert({std::min(t[i], t[(i + 1) % 3]), std::max(t[i], t[(i + 1) % 3])});

        double sum_l2 = 0.0, sum_h2 = 0.0;
        std::vector<double> L, H;
        L.reserve(bar_set.size());
        H.reserve(bar_set.size());
        for (auto [a, b] : bar_set) {
            double l = (pts[a] - pts[b]).norm();
            double h = spec.size_at((pts[a] + pts[b]) * 0.5);
            L.push_back(l);
            H.push_back(h);
            sum_l2 += l * l;
            sum_h2 += h * h;
        }
        double scale = Fscale * std::sqrt(sum_l2 / sum_h2);
        std::vector<Vec2> force(pts.size());
        std::size_t bi = 0;
        for (auto [a, b] : bar_set) {
            double l0 = H[bi] * scale;
            double f = std::max(l0 - L[bi], 0.0);
            Vec2 dir = (pts[a] - pts[b]) / std::max(L[bi], 1e-14);
            force[a] += dir * f;
            force[b] -= dir * f;
            ++bi;
        }
        double max_move = 0.0;
        for (std::size_t i = nfix; i < pts.size(); ++i) {
            Vec2 step = force[i] * dt;
            pts[i] += step;
            double d = sd(pts[i]);
            if (d > 0) pts[i] -= sd.grad(pts[i]) * d;
            max_move = std::max(max_move, step.norm() / spec.size_at(pts[i]));
        }
        if (max_move < 1e-3) break;
    }

    // drop interior stragglers the relaxation left hugging the boundary;
    // they make sliver triangles against the fixed boundary points
    {
        std::vector<Vec2> kept(pts.begin(), pts.begin() + nfix);
        std::vector<int> kept_kind(kind.begin(), kind.begin() + nfix);
        for (std::size_t i = nfix; i < pts.size(); ++i) {
            if (sd(pts[i]) < -0.35 * spec.size_at(pts[i])) {
                kept.push_back(pts[i]);
                kept_kind.push_back(kind[i]);
            }
        }
        pts = std::move(kept);
        kind = std::move(kept_kind);
    }

    // final triangulation and assembly
    tris = delaunay_triangulate(pts);
    std::erase_if(tris, [&](const std::array<int, 3>& t) {
        Vec2 c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
        return sd(c) > 0.0;
    });

    // drop vertices that ended up unused
    std::vector<int> remap(pts.size(), -1);
    Mesh mesh;
    for (const auto& t : tris)
        for (int v : t)
            if (remap[v] < 0) {
                remap[v] = mesh.vertex_count();
                mesh.vertices.push_back(pts[v]);
                mesh.vertex_kind.push_back(kind[v]);
            }
    for (const auto& t : tris) mesh.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    mesh.finalize();

    // boundary loops from edges with a single incident triangle
    std::map<std::pair<int, int>, int> edge_use;
    for (const auto& t : mesh.triangles)
        for (int i = 0; i < 3; ++i) {
            int a = t[i], b = t[(i + 1) % 3];
            edge_use[{std::min(a, b), std::max(a, b)}]++;
        }
    std::map<int, int> next_on_boundary; // directed edge a->b with the domain on the left
    for (const auto& t : mesh.triangles)
        for (int i = 0; i < 3; ++i) {
            int a = t[i], b = t[(i + 1) % 3];
            if (edge_use[{std::min(a, b), std::max(a, b)}] == 1) next_on_boundary[a] = b;
        }
    std::set<int> seen;
    std::vector<std::vector<int>> loops;
    for (auto [start, unused] : next_on_boundary) {
        if (seen.count(start)) continue;
        std::vector<int> loop;
        int v = start;
        do {
            loop.push_back(v);
            seen.insert(v);
            auto it = next_on_boundary.find(v);
            if (it == next_on_boundary.end()) throw GeometryError("open boundary chain");
            v = it->second;
        } while (v != start);
        loops.push_back(std::move(loop));
    }
    if (loops.size() != spec.holes.size() + 1)
        throw GeometryError("boundary loop count does not match the domain topology");

    // classify loops by nearest circle, snap vertices onto it, orient:
    // outer stays counterclockwise, holes get reversed to run counterclockwise
    // around the hole (the walk above leaves them clockwise)
    mesh.boundary_loops.assign(loops.size(), {});
    std::vector<bool> taken(circles.size(), false);
    for (auto& loop : loops) {
        Vec2 p = mesh.vertices[loop[0]];
        int best = -1;
        double bd = 1e300;
        for (std::size_t k = 0; k < circles.size(); ++k) {
            double d = std::fabs((p - circles[k].center).norm() - circles[k].radius);
            if (d < bd) {
                bd = d;
                best = static_cast<int>(k);
            }
        }
        if (taken[best]) throw GeometryError("two boundary loops matched one circle");
        taken[best] = true;
        const Circle& c = circles[best];
        for (int v : loop) {
            Vec2 r = mesh.vertices[v] - c.center;
            mesh.vertices[v] = c.center + r * (c.radius / r.norm());
            mesh.vertex_kind[v] = best;
        }
        if (polygon_signed_area(mesh.vertices, loop) < 0) std::reverse(loop.begin(), loop.end());
        mesh.boundary_loops[best] = std::move(loop);
    }
    mesh.finalize(); // vertex snapping moved coordinates

    if (mesh.euler_characteristic() != 1 - static_cast<int>(spec.holes.size()))
        throw GeometryError("Euler characteristic check failed");
    if (mesh.min_angle_deg() < spec.min_angle_deg)
        throw ResolutionError("mesh quality below the minimum angle threshold");
    return mesh;
}

std::string mesh_to_text(const Mesh& mesh) {
    std::ostringstream os;
    os.precision(17);
    os << mesh.vertex_count() << " " << mesh.triangle_count() << " " << mesh.loop_count() << "\n";
    for (int v = 0; v < mesh.vertex_count(); ++v)
        os << v << " " << mesh.vertices[v].x << " " << mesh.vertices[v].y << " " << mesh.vertex_kind[v] << "\n";
    for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    return os.str();
}

ChartPoint annulus_exact_chart(const AnnulusChart& chart, Vec2 p) {
    if (chart.inner_radius <= 0 || chart.inner_radius >= 1)
        throw ChartError("inner radius must lie in (0,1)");
    double r = p.norm();
    if (r <= chart.inner_radius || r >= 1.0) throw ChartError("point outside the open annulus");
    double d = chart.winding;
    ChartPoint out;
    out.theta = d * std::atan2(p.y, p.x);
    out.h = 1.0 + d * std::log(r);
    out.grad_theta = Vec2{-p.y, p.x} * (d / (r * r));
    out.rho_u = 1.0;
    return out;
}

} // namespace gldeg
