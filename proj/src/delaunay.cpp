#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "gldeg/errors.hpp"
#include "gldeg/mesh.hpp"

namespace gldeg {

namespace {

struct Tri {
    int v[3];
    int n[3]; // neighbor opposite v[i], -1 if none
    bool alive;
};

double orient(Vec2 a, Vec2 b, Vec2 c) { return (b - a).cross(c - a); }

// positive when p is strictly inside the circumcircle of ccw (a,b,c)
double incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
    double ax = a.x - p.x, ay = a.y - p.y;
    double bx = b.x - p.x, by = b.y - p.y;
    double cx = c.x - p.x, cy = c.y - p.y;
    double a2 = ax * ax + ay * ay;
    double b2 = bx * bx + by * by;
    double c2 = cx * cx + cy * cy;
    return ax * (by * c2 - cy * b2) - ay * (bx * c2 - cx * b2) + a2 * (bx * cy - cx * by);
}

struct Triangulation {
    std::vector<Vec2> pts;
    std::vector<Tri> tris;
    std::vector<std::uint32_t> mark;
    std::uint32_t stamp = 0;
    int hint = 0;

    int locate(Vec2 p) const {
        int t = hint;
        if (t < 0 || t >= static_cast<int>(tris.size()) || !tris[t].alive) {
            t = -1;
            for (int i = static_cast<int>(tris.size()) - 1; i >= 0; --i)
                if (tris[i].alive) { t = i; break; }
        }
        std::size_t steps = 0, cap = 4 * tris.size() + 64;
        while (true) {
            if (++steps > cap) throw NumericError("point location walk did not terminate");
            const Tri& T = tris[t];
            int next = -1;
            for (int i = 0; i < 3; ++i) {
                Vec2 a = pts[T.v[(i + 1) % 3]];
                Vec2 b = pts[T.v[(i + 2) % 3]];
                if (orient(a, b, p) < 0.0) { next = T.n[i]; break; }
            }
            if (next < 0) return t;
            t = next;
        }
    }

    void insert(int pi) {
        Vec2 p = pts[pi];
        int t0 = locate(p);
        ++stamp;
        mark.resize(tris.size(), 0);

        // cavity of circumcircle violations
        std::vector<int> cavity, queue{t0};
        mark[t0] = stamp;
        while (!queue.empty()) {
            int t = queue.back();
            queue.pop_back();
            cavity.push_back(t);
            for (int i = 0; i < 3; ++i) {
                int nb = tris[t].n[i];
                if (nb < 0 || mark[nb] == stamp || !tris[nb].alive) continue;
                const Tri& N = tris[nb];
                if (incircle(pts[N.v[0]], pts[N.v[1]], pts[N.v[2]], p) > 0.0) {
                    mark[nb] = stamp;
                    queue.push_back(nb);
                }
            }
        }

        struct BEdge {
            int a, b, outside, slot;
        };
        std::vector<BEdge> rim;
        for (int t : cavity) {
            for (int i = 0; i < 3; ++i) {
                int nb = tris[t].n[i];
                if (nb >= 0 && mark[nb] == stamp) continue;
                rim.push_back({tris[t].v[(i + 1) % 3], tris[t].v[(i + 2) % 3], nb, -1});
            }
        }
        for (int t : cavity) tris[t].alive = false;

        // new triangle (p, a, b) per rim edge; link across shared edges by
        // matching the second rim endpoint
        std::unordered_map<int, int> by_a, by_b;
        std::vector<int> fresh;
        fresh.reserve(rim.size());
        for (auto& e : rim) {
            int id = static_cast<int>(tris.size());
            tris.push_back({{pi, e.a, e.b}, {e.outside, -1, -1}, true});
            mark.push_back(0);
            if (e.outside >= 0) {
                Tri& O = tris[e.outside];
                for (int i = 0; i < 3; ++i) {
                    if ((O.v[(i + 1) % 3] == e.b && O.v[(i + 2) % 3] == e.a)) O.n[i] = id;
                }
            }
            by_a[e.a] = id;
            by_b[e.b] = id;
            fresh.push_back(id);
        }
        for (int id : fresh) {
            Tri& T = tris[id];
            T.n[1] = by_a.at(T.v[2]); // across edge (b, p)
            T.n[2] = by_b.at(T.v[1]); // across edge (p, a)
        }
        hint = fresh.empty() ? hint : fresh.back();
    }
};

} // namespace

std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 3) throw GeometryError("need at least 3 points to triangulate");

    Triangulation T;
    T.pts = pts;
    Vec2 lo = pts[0], hi = pts[0];
    for (Vec2 p : pts) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    Vec2 c = (lo + hi) * 0.5;
    double span = std::max({hi.x - lo.x, hi.y - lo.y, 1e-12}) * 1e4;
    T.pts.push_back({c.x - 3 * span, c.y - span});
    T.pts.push_back({c.x + 3 * span, c.y - span});
    T.pts.push_back({c.x, c.y + 3 * span});
    T.tris.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});
    T.mark.push_back(0);

    // serpentine grid order keeps the location walk short
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    double cell = std::max(hi.x - lo.x, hi.y - lo.y) / std::max(1.0, std::sqrt(double(n)));
    if (cell <= 0) cell = 1.0;
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        int ri = static_cast<int>((pts[i].y - lo.y) / cell);
        int rj = static_cast<int>((pts[j].y - lo.y) / cell);
        if (ri != rj) return ri < rj;
        double xi = (ri % 2) ? -pts[i].x : pts[i].x;
        double xj = (ri % 2) ? -pts[j].x : pts[j].x;
        return xi < xj;
    });

    for (int i : order) T.insert(i);

    std::vector<std::array<int, 3>> out;
    out.reserve(2 * n);
    for (const Tri& t : T.tris) {
        if (!t.alive) continue;
        if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
        out.push_back({t.v[0], t.v[1], t.v[2]});
    }
    return out;
}

} // namespace gldeg
